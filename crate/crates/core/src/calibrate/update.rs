//! Per-slice scaling updates and the partial sums that feed them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result, SliceRef};
use crate::math;
use crate::tensor::{Accumulator, MarginalTargets, MultiIndex, ScalingState, SignedTensor, Summation};

/// Why a single slice update has no admissible factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceError {
    /// No positive root exists for the slice equation.
    Infeasible,
    /// Both partial sums vanish.
    Degenerate,
    /// Inputs or result not finite, or the root underflowed to zero.
    NonFinite,
}

impl SliceError {
    pub(crate) fn at(self, axis: usize, index: usize) -> Error {
        let slice = SliceRef { axis, index };
        match self {
            SliceError::Infeasible => Error::InfeasibleSlice { slice },
            SliceError::Degenerate => Error::DegenerateSlice { slice },
            SliceError::NonFinite => Error::non_finite("scaling factor", Some(axis), vec![index]),
        }
    }
}

/// Positive root of `S⁺α² - pα - S⁻ = 0`, i.e. the factor that makes
/// `S⁺α - S⁻/α = p` hold exactly.
pub fn signed_update(s_plus: f64, s_minus: f64, target: f64) -> Result<f64, SliceError> {
    if !(s_plus.is_finite() && s_minus.is_finite() && target.is_finite()) {
        return Err(SliceError::NonFinite);
    }
    if s_plus <= 0.0 {
        return match (s_minus > 0.0, target < 0.0) {
            (false, _) => Err(SliceError::Degenerate),
            // -S⁻/α = p has the positive root -S⁻/p only for p < 0.
            (true, true) => finite_positive(-s_minus / target),
            (true, false) => Err(SliceError::Infeasible),
        };
    }
    if s_minus <= 0.0 && target <= 0.0 {
        return Err(SliceError::Infeasible);
    }
    let disc = math::sqrt(target * target + 4.0 * s_plus * s_minus);
    let alpha = if target >= 0.0 {
        (target + disc) / (2.0 * s_plus)
    } else {
        // Same root without cancellation when p < 0.
        2.0 * s_minus / (disc - target)
    };
    finite_positive(alpha)
}

/// Classical Sinkhorn ratio `p / S`.
pub fn classic_update(s: f64, target: f64) -> Result<f64, SliceError> {
    if !(s.is_finite() && target.is_finite()) {
        return Err(SliceError::NonFinite);
    }
    if s == 0.0 {
        return Err(SliceError::Degenerate);
    }
    if s < 0.0 || target <= 0.0 {
        return Err(SliceError::Infeasible);
    }
    finite_positive(target / s)
}

fn finite_positive(alpha: f64) -> Result<f64, SliceError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(SliceError::NonFinite)
    }
}

fn check_parts(plus: &SignedTensor, minus: &SignedTensor, scaling: &ScalingState, axis: usize) -> Result<()> {
    plus.same_shape(minus)?;
    plus.check_axis(axis)?;
    scaling.conform(plus)
}

/// `(S⁺, S⁻)` for one slice: the slice sums of `Q⁺ · Π α` and `Q⁻ · Π α⁻¹`,
/// where the products run over every axis except `axis`.
pub fn partial_sums(
    plus: &SignedTensor,
    minus: &SignedTensor,
    scaling: &ScalingState,
    axis: usize,
    index: usize,
) -> Result<(f64, f64)> {
    check_parts(plus, minus, scaling, axis)?;
    let len = plus.shape()[axis];
    if index >= len {
        return Err(Error::IndexOutOfRange { axis, index, len });
    }
    let mut sp = Accumulator::new(Summation::Sequential);
    let mut sm = Accumulator::new(Summation::Sequential);
    let (pv, mv) = (plus.values(), minus.values());
    plus.for_each_in_slice(axis, index, |flat, idx| {
        if pv[flat] > 0.0 || mv[flat] > 0.0 {
            let prod = scaling.product_except(idx, Some(axis));
            if pv[flat] > 0.0 {
                sp.add(pv[flat] * prod);
            }
            if mv[flat] > 0.0 {
                sm.add(mv[flat] / prod);
            }
        }
    });
    let (sp, sm) = (sp.value(), sm.value());
    if !(sp.is_finite() && sm.is_finite()) {
        return Err(Error::non_finite("partial sum", Some(axis), vec![index]));
    }
    Ok((sp, sm))
}

/// `(S⁺, S⁻)` for every slice along `axis` in one pass over the tensor.
///
/// Terms are accumulated in the same order as [`partial_sums`], so both
/// agree bit for bit under sequential summation.
pub fn axis_partial_sums(
    plus: &SignedTensor,
    minus: &SignedTensor,
    scaling: &ScalingState,
    axis: usize,
    summation: Summation,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_parts(plus, minus, scaling, axis)?;
    let n = plus.shape()[axis];
    let mut sp = vec![Accumulator::new(summation); n];
    let mut sm = vec![Accumulator::new(summation); n];
    let mut idx = MultiIndex::new(plus.shape());
    for (&p, &m) in plus.values().iter().zip(minus.values()) {
        if p > 0.0 || m > 0.0 {
            let cur = idx.current();
            let prod = scaling.product_except(cur, Some(axis));
            if p > 0.0 {
                sp[cur[axis]].add(p * prod);
            }
            if m > 0.0 {
                sm[cur[axis]].add(m / prod);
            }
        }
        idx.advance();
    }
    let sp: Vec<f64> = sp.iter().map(Accumulator::value).collect();
    let sm: Vec<f64> = sm.iter().map(Accumulator::value).collect();
    if let Some(i) = (0..n).find(|&i| !(sp[i].is_finite() && sm[i].is_finite())) {
        return Err(Error::non_finite("partial sum", Some(axis), vec![i]));
    }
    Ok((sp, sm))
}

/// Re-solves every factor along `axis` against the other axes' current
/// factors. All updates read the same pre-sweep state; they are independent
/// because no `S±` along `axis` depends on that axis's own factors.
pub fn sweep_axis(
    plus: &SignedTensor,
    minus: &SignedTensor,
    scaling: &mut ScalingState,
    axis: usize,
    targets: &MarginalTargets,
) -> Result<()> {
    sweep_axis_with(plus, minus, scaling, axis, targets, Summation::Sequential, false)
}

pub(crate) fn sweep_axis_with(
    plus: &SignedTensor,
    minus: &SignedTensor,
    scaling: &mut ScalingState,
    axis: usize,
    targets: &MarginalTargets,
    summation: Summation,
    classic: bool,
) -> Result<()> {
    targets.conform(plus)?;
    let (sp, sm) = axis_partial_sums(plus, minus, scaling, axis, summation)?;
    let p = targets.axis(axis);
    let alphas = (0..sp.len())
        .map(|i| {
            let r = if classic { classic_update(sp[i], p[i]) } else { signed_update(sp[i], sm[i], p[i]) };
            r.map_err(|e| e.at(axis, i))
        })
        .collect::<Result<Vec<f64>>>()?;
    scaling.set_axis(axis, alphas);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::assemble_posterior;

    fn certificate(sp: f64, sm: f64, p: f64, alpha: f64) -> f64 {
        sp * alpha - sm / alpha - p
    }

    #[test]
    fn root_formula_examples() {
        assert_eq!(signed_update(1.0, 0.0, 2.0), Ok(2.0));
        assert_eq!(signed_update(1.0, 1.0, 0.0), Ok(1.0));
        // 2α² - 5α - 3 = (2α + 1)(α - 3)
        assert_eq!(signed_update(2.0, 3.0, 5.0), Ok(3.0));
    }

    #[test]
    fn negative_target_uses_stable_branch() {
        // α² + 5α - 6 = (α + 6)(α - 1)
        let a = signed_update(1.0, 6.0, -5.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        let (sp, sm, p) = (1.0, 1e-12, -1e4);
        let a = signed_update(sp, sm, p).unwrap();
        assert!(certificate(sp, sm, p, a).abs() <= 1e-12 * p.abs());
        assert!((a - 1e-16).abs() / 1e-16 < 1e-10);
    }

    #[test]
    fn slice_errors() {
        assert_eq!(signed_update(0.0, 1.0, 0.3), Err(SliceError::Infeasible));
        assert_eq!(signed_update(0.0, 0.0, 0.3), Err(SliceError::Degenerate));
        assert_eq!(signed_update(0.0, 2.0, -0.5), Ok(4.0));
        assert_eq!(signed_update(1.0, 0.0, -0.5), Err(SliceError::Infeasible));
        assert_eq!(signed_update(f64::NAN, 0.0, 1.0), Err(SliceError::NonFinite));
        assert_eq!(signed_update(1e-300, 0.0, 1e300), Err(SliceError::NonFinite));
        assert_eq!(classic_update(0.0, 1.0), Err(SliceError::Degenerate));
        assert_eq!(classic_update(-1.0, 1.0), Err(SliceError::Infeasible));
    }

    #[test]
    fn classic_ratio() {
        assert_eq!(classic_update(2.0, 1.0), Ok(0.5));
        assert_eq!(classic_update(1.0, 1.0), Ok(1.0));
        for &(s, p) in &[(0.3, 0.7), (1.7e-3, 0.25), (12.5, 1e-4), (0.1, 0.3)] {
            assert_eq!(classic_update(s, p), signed_update(s, 0.0, p));
        }
    }

    #[test]
    fn partial_sums_examples() {
        let q = SignedTensor::new(vec![1, 2], vec![2.0, -1.0]).unwrap();
        let (plus, minus) = q.sign_split();
        let s = ScalingState::new(vec![vec![5.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(partial_sums(&plus, &minus, &s, 1, 1).unwrap(), (0.0, 0.2));
        assert_eq!(partial_sums(&plus, &minus, &s, 1, 0).unwrap(), (10.0, 0.0));

        let q = SignedTensor::new(vec![2, 2], vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let (plus, minus) = q.sign_split();
        let ones = ScalingState::ones(q.shape());
        assert_eq!(partial_sums(&plus, &minus, &ones, 0, 0).unwrap(), (1.0, 1.0));
        assert_eq!(partial_sums(&plus, &minus, &ones, 1, 0).unwrap(), (1.5, 0.0));
        assert!(matches!(
            partial_sums(&plus, &minus, &ones, 1, 2),
            Err(Error::IndexOutOfRange { axis: 1, index: 2, len: 2 })
        ));
    }

    #[test]
    fn sweep_restores_axis_marginal() {
        let q = SignedTensor::new(vec![2, 3], vec![1.0, -0.2, 0.5, 0.3, 0.8, -0.1]).unwrap();
        let targets = MarginalTargets::new(vec![vec![0.6, 0.4], vec![0.3, 0.3, 0.4]]).unwrap();
        let (plus, minus) = q.sign_split();
        let mut s = ScalingState::ones(q.shape());
        for axis in 0..2 {
            sweep_axis(&plus, &minus, &mut s, axis, &targets).unwrap();
            let m = assemble_posterior(&q, &s).unwrap().axis_marginal(axis).unwrap();
            for (a, b) in m.iter().zip(targets.axis(axis)) {
                assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn sweep_reports_the_infeasible_slice() {
        let q = SignedTensor::new(vec![2, 2], vec![1.0, 1.0, -1.0, 0.0]).unwrap();
        let targets = MarginalTargets::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let (plus, minus) = q.sign_split();
        let mut s = ScalingState::ones(q.shape());
        assert_eq!(
            sweep_axis(&plus, &minus, &mut s, 0, &targets),
            Err(Error::InfeasibleSlice { slice: SliceRef { axis: 0, index: 1 } })
        );
    }
}
