//! Primal objective, dual function and the `α = e^{-λ}` change of variables.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::tensor::{conform_vectors, MarginalTargets, MultiIndex, ScalingState, SignedTensor};

/// Lagrange multipliers, one vector per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    lambdas: Vec<Vec<f64>>,
}

impl Multipliers {
    pub fn new(lambdas: Vec<Vec<f64>>) -> Result<Self> {
        for (axis, row) in lambdas.iter().enumerate() {
            if let Some(index) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteMultiplier { axis, index });
            }
        }
        Ok(Multipliers { lambdas })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Multipliers { lambdas: shape.iter().map(|&n| alloc::vec![0.0; n]).collect() }
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.lambdas[axis]
    }

    pub fn as_slices(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.lambdas
    }

    fn exponent(&self, index: &[usize]) -> f64 {
        index.iter().zip(&self.lambdas).map(|(&i, l)| l[i]).sum()
    }
}

/// `λ = -log α`.
pub fn multipliers_from_scaling(scaling: &ScalingState) -> Multipliers {
    Multipliers {
        lambdas: scaling
            .as_slices()
            .iter()
            .map(|row| row.iter().map(|&a| -math::ln(a)).collect())
            .collect(),
    }
}

/// `α = e^{-λ}`; fails if a factor overflows or underflows.
pub fn scaling_from_multipliers(m: &Multipliers) -> Result<ScalingState> {
    ScalingState::new(
        m.lambdas
            .iter()
            .map(|row| row.iter().map(|&l| math::exp(-l)).collect())
            .collect(),
    )
}

/// `Σ |P| (log(|P| / |Q|) - 1)` over the support of `Q`, with `0 log 0 = 0`.
///
/// `P` must carry the sign of `Q` wherever it is nonzero and vanish where
/// `Q` does; otherwise the entropy is infinite and an error is returned.
pub fn relative_entropy(p: &SignedTensor, q: &SignedTensor) -> Result<f64> {
    p.same_shape(q)?;
    let mut total = 0.0;
    for (k, (&pv, &qv)) in p.values().iter().zip(q.values()).enumerate() {
        if qv == 0.0 {
            if pv != 0.0 {
                return Err(Error::SupportViolation { index: q.unravel(k) });
            }
            continue;
        }
        if pv == 0.0 {
            continue;
        }
        if (pv > 0.0) != (qv > 0.0) {
            return Err(Error::SignMismatch { index: q.unravel(k) });
        }
        let (a, b) = (math::abs(pv), math::abs(qv));
        total += a * (math::ln(a / b) - 1.0);
    }
    if !total.is_finite() {
        return Err(Error::non_finite("relative entropy", None, Vec::new()));
    }
    Ok(total)
}

/// Optimal posterior for fixed multipliers: `|Q| e^{-X Σλ}` with the sign of `Q`.
pub fn posterior_from_multipliers(q: &SignedTensor, m: &Multipliers) -> Result<SignedTensor> {
    conform_vectors(&m.lambdas, q.shape())?;
    let mut values = Vec::with_capacity(q.len());
    let mut idx = MultiIndex::new(q.shape());
    for &qv in q.values() {
        let v = if qv == 0.0 {
            0.0
        } else {
            let x = if qv > 0.0 { 1.0 } else { -1.0 };
            qv * math::exp(-x * m.exponent(idx.current()))
        };
        if !v.is_finite() {
            return Err(Error::non_finite("posterior entry", None, idx.current().to_vec()));
        }
        values.push(v);
        idx.advance();
    }
    SignedTensor::new(q.shape().to_vec(), values)
}

/// `g(λ) = -Σ |P*(λ)| - Σ_ℓ Σ_i λ_i p_i`, the concave Lagrange dual.
pub fn dual_value(q: &SignedTensor, targets: &MarginalTargets, m: &Multipliers) -> Result<f64> {
    targets.conform(q)?;
    let p = posterior_from_multipliers(q, m)?;
    let mass: f64 = p.values().iter().map(|&v| math::abs(v)).sum();
    let linear: f64 = m
        .lambdas
        .iter()
        .zip(targets.as_slices())
        .flat_map(|(l, t)| l.iter().zip(t).map(|(a, b)| a * b))
        .sum();
    let g = -mass - linear;
    if !g.is_finite() {
        return Err(Error::non_finite("dual value", None, Vec::new()));
    }
    Ok(g)
}

/// `∂g/∂λ`: signed marginals of `P*(λ)` minus the targets, per axis.
pub fn dual_gradient(q: &SignedTensor, targets: &MarginalTargets, m: &Multipliers) -> Result<Vec<Vec<f64>>> {
    targets.conform(q)?;
    let p = posterior_from_multipliers(q, m)?;
    Ok((0..q.ndim())
        .map(|axis| {
            let marginal = p.axis_marginal(axis).expect("axis in range");
            marginal.iter().zip(targets.axis(axis)).map(|(a, b)| a - b).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn t(shape: &[usize], v: &[f64]) -> SignedTensor {
        SignedTensor::new(shape.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let q = t(&[2, 2], &[0.5, -0.25, 0.0, 1.0]);
        assert!((relative_entropy(&q, &q).unwrap() + 1.75).abs() < 1e-15);
        let zero = SignedTensor::zeros(vec![2, 2]).unwrap();
        assert_eq!(relative_entropy(&zero, &q).unwrap(), 0.0);

        let q = t(&[2], &[1.0, -1.0]);
        let p = t(&[2], &[2.0, -2.0]);
        let expected = 4.0 * (core::f64::consts::LN_2 - 1.0);
        assert!((relative_entropy(&p, &q).unwrap() - expected).abs() < 1e-15);
        assert!((expected + 1.2274).abs() < 1e-4);
    }

    #[test]
    fn entropy_rejects_sign_and_support_violations() {
        let q = t(&[2, 2], &[1.0, -1.0, 0.0, 1.0]);
        let p = t(&[2, 2], &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(relative_entropy(&p, &q), Err(Error::SignMismatch { index: vec![0, 1] }));
        let p = t(&[2, 2], &[1.0, -1.0, 0.1, 1.0]);
        assert_eq!(relative_entropy(&p, &q), Err(Error::SupportViolation { index: vec![1, 0] }));
    }

    #[test]
    fn dual_at_zero_is_minus_total_mass() {
        let q = t(&[2, 2], &[0.5, -0.25, 0.0, 1.0]);
        let targets = MarginalTargets::new(vec![vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let g = dual_value(&q, &targets, &Multipliers::zeros(q.shape())).unwrap();
        assert_eq!(g, -1.75);
    }

    #[test]
    fn positive_dual_matches_classical_form() {
        // g_s(λ) = Σ (-Q e^{-Σλ}) - Σ λ p
        let q = t(&[2, 2], &[0.1, 0.2, 0.3, 0.4]);
        let targets = MarginalTargets::new(vec![vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let m = Multipliers::new(vec![vec![0.2, -0.1], vec![0.3, 0.05]]).unwrap();
        let mut expected = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let l = m.axis(0)[i] + m.axis(1)[j];
                expected -= q.get(&[i, j]).unwrap() * libm::exp(-l);
            }
        }
        for axis in 0..2 {
            for i in 0..2 {
                expected -= m.axis(axis)[i] * targets.axis(axis)[i];
            }
        }
        let g = dual_value(&q, &targets, &m).unwrap();
        assert!((g - expected).abs() < 1e-15);
    }

    #[test]
    fn scaling_round_trip() {
        let s = ScalingState::new(vec![vec![1.0, core::f64::consts::E]]).unwrap();
        let m = multipliers_from_scaling(&s);
        assert_eq!(m.axis(0)[0], 0.0);
        assert!((m.axis(0)[1] + 1.0).abs() < 1e-15);
        let back = scaling_from_multipliers(&m).unwrap();
        assert!((back.axis(0)[1] - core::f64::consts::E).abs() < 1e-15);
        let huge = Multipliers::new(vec![vec![-1e6]]).unwrap();
        assert!(scaling_from_multipliers(&huge).is_err());
        assert!(Multipliers::new(vec![vec![f64::NAN]]).is_err());
    }
}
