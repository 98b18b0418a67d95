//! Independent reference solver and random feasible instances.
//!
//! The reference solver maximizes the dual with full-gradient steps and an
//! Armijo backtracking line search. It shares nothing with the sweep logic
//! in [`crate::calibrate`] beyond the tensor and duality primitives, so
//! agreement between the two is a meaningful check.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duality::{posterior_from_multipliers, Multipliers};
use crate::error::{Error, Result};
use crate::math;
use crate::tensor::{MarginalTargets, SignedTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// First trial step; later steps start from a Barzilai-Borwein estimate.
    pub step_size: f64,
    pub gradient_tolerance: f64,
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { step_size: 1.0, gradient_tolerance: 1e-10, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub posterior: SignedTensor,
    pub multipliers: Multipliers,
    pub steps: usize,
    pub gradient_norm: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;

struct Point {
    lambda: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    /// Magnitude of the terms in `value`, for rounding slack.
    scale: f64,
}

struct DualProblem<'a> {
    q: &'a SignedTensor,
    targets: Vec<f64>,
    shape: Vec<usize>,
}

impl DualProblem<'_> {
    fn split(&self, flat: &[f64]) -> Multipliers {
        let mut rows = Vec::with_capacity(self.shape.len());
        let mut offset = 0;
        for &n in &self.shape {
            rows.push(flat[offset..offset + n].to_vec());
            offset += n;
        }
        Multipliers::new(rows).expect("finite multipliers")
    }

    fn eval(&self, lambda: Vec<f64>) -> Option<Point> {
        if lambda.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let m = self.split(&lambda);
        let p = posterior_from_multipliers(self.q, &m).ok()?;
        let mass: f64 = p.values().iter().map(|&v| math::abs(v)).sum();
        let mut linear = 0.0;
        let mut linear_abs = 0.0;
        for (l, t) in lambda.iter().zip(&self.targets) {
            linear += l * t;
            linear_abs += math::abs(l * t);
        }
        let mut grad = Vec::with_capacity(lambda.len());
        let mut offset = 0;
        for axis in 0..self.shape.len() {
            let marginal = p.axis_marginal(axis).expect("axis in range");
            for (i, v) in marginal.into_iter().enumerate() {
                grad.push(v - self.targets[offset + i]);
            }
            offset += self.shape[axis];
        }
        let value = -mass - linear;
        value.is_finite().then_some(Point { lambda, value, grad, scale: mass + linear_abs })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes the dual by gradient ascent and returns the posterior at the
/// final multipliers.
pub fn dual_ascent_solve(
    q: &SignedTensor,
    targets: &MarginalTargets,
    config: &OracleConfig,
) -> Result<OracleSolution> {
    if !(config.step_size > 0.0 && config.step_size.is_finite()) {
        return Err(Error::InvalidConfig("step_size must be positive and finite"));
    }
    if config.gradient_tolerance.is_nan() || config.gradient_tolerance <= 0.0 {
        return Err(Error::InvalidConfig("gradient_tolerance must be positive"));
    }
    targets.conform(q)?;
    let problem = DualProblem {
        q,
        targets: targets.as_slices().iter().flatten().copied().collect(),
        shape: q.shape().to_vec(),
    };
    let dim = problem.targets.len();
    let mut point = problem
        .eval(alloc::vec![0.0; dim])
        .ok_or_else(|| Error::non_finite("dual value", None, Vec::new()))?;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;

    for step in 0..=config.max_steps {
        let gnorm2 = dot(&point.grad, &point.grad);
        let gnorm = math::sqrt(gnorm2);
        if gnorm <= config.gradient_tolerance {
            let multipliers = problem.split(&point.lambda);
            let posterior = posterior_from_multipliers(q, &multipliers)?;
            return Ok(OracleSolution { posterior, multipliers, steps: step, gradient_norm: gnorm });
        }
        if step == config.max_steps {
            return Err(Error::OracleDidNotConverge { steps: step, gradient_norm: gnorm });
        }

        let mut t = config.step_size;
        if let Some((prev_lambda, prev_grad)) = &previous {
            let s: Vec<f64> = point.lambda.iter().zip(prev_lambda).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = point.grad.iter().zip(prev_grad).map(|(a, b)| a - b).collect();
            let curvature = -dot(&s, &y);
            if curvature > 0.0 {
                t = dot(&s, &s) / curvature;
            }
        }

        let slack = 16.0 * f64::EPSILON * point.scale;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = point.lambda.iter().zip(&point.grad).map(|(l, g)| l + t * g).collect();
            if let Some(next) = problem.eval(trial) {
                if next.value >= point.value + ARMIJO * t * gnorm2 - slack {
                    accepted = Some(next);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(Error::OracleDidNotConverge { steps: step, gradient_norm: gnorm });
        };
        previous = Some((core::mem::take(&mut point.lambda), core::mem::take(&mut point.grad)));
        point = next;
    }
    unreachable!("loop returns at max_steps")
}

const MAX_ATTEMPTS: usize = 64;

/// Builds a prior and targets that admit a same-sign posterior by
/// construction.
///
/// A feasible tensor is drawn first: magnitudes in `[0.5, 1.5)`, a
/// `negative_fraction` subset negated and shrunk so every slice keeps a
/// positive signed sum, and the whole normalized to unit mass. Its marginals
/// become the targets, and the prior is a same-sign multiplicative
/// perturbation of it. Deterministic per seed.
pub fn generate_feasible_instance(
    shape: &[usize],
    negative_fraction: f64,
    seed: u64,
) -> Result<(SignedTensor, MarginalTargets)> {
    if !(0.0..=1.0).contains(&negative_fraction) {
        return Err(Error::InvalidConfig("negative_fraction must lie in [0, 1]"));
    }
    let template = SignedTensor::zeros(shape.to_vec())?;
    let n = template.len();
    let negatives = (libm::round(negative_fraction * n as f64) as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..MAX_ATTEMPTS {
        let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        for k in sample(&mut rng, n, negatives).iter() {
            values[k] *= -rng.gen_range(0.05..0.3);
        }
        let feasible = SignedTensor::new(shape.to_vec(), values)?;
        let (plus, _) = feasible.sign_split();
        let slices_ok = (0..feasible.ndim()).all(|axis| {
            let signed = feasible.axis_marginal(axis).expect("axis in range");
            let positive = plus.axis_marginal(axis).expect("axis in range");
            signed.iter().zip(&positive).all(|(&s, &p)| s > 1e-3 * p)
        });
        if !slices_ok {
            continue;
        }
        let total = feasible.total();
        let feasible = feasible.map(|v| v / total)?;
        let targets = MarginalTargets::new(feasible.marginals_with(Default::default()))?;
        let prior = feasible.map(|v| v * math::exp(rng.gen_range(-1.0..1.0)))?;
        return Ok((prior, targets));
    }
    Err(Error::GeneratorFailed { attempts: MAX_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn generator_is_deterministic_and_signed() {
        let (q1, t1) = generate_feasible_instance(&[3, 4, 2], 0.1, 7).unwrap();
        let (q2, t2) = generate_feasible_instance(&[3, 4, 2], 0.1, 7).unwrap();
        assert_eq!(q1, q2);
        assert_eq!(t1, t2);
        assert_eq!(q1.negative_count(), 2);
        let (q3, _) = generate_feasible_instance(&[3, 4, 2], 0.1, 8).unwrap();
        assert_ne!(q1, q3);
    }

    #[test]
    fn zero_fraction_gives_positive_instance() {
        let (q, t) = generate_feasible_instance(&[4, 4], 0.0, 1).unwrap();
        assert!(!q.has_negative());
        let totals = t.totals();
        assert!((totals[0] - 1.0).abs() < 1e-12 && (totals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_rejects_impossible_fractions() {
        assert!(matches!(
            generate_feasible_instance(&[3, 3], 1.0, 0),
            Err(Error::GeneratorFailed { .. })
        ));
        assert!(matches!(generate_feasible_instance(&[3, 3], 1.5, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn already_optimal_prior_needs_no_steps() {
        let q = SignedTensor::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let sol = dual_ascent_solve(&q, &t, &OracleConfig::default()).unwrap();
        assert_eq!(sol.steps, 0);
        assert_eq!(sol.posterior, q);
        assert!(sol.multipliers.as_slices().iter().flatten().all(|&l| l == 0.0));
    }

    #[test]
    fn step_budget_is_enforced() {
        let q = SignedTensor::new(vec![2, 2], vec![1.0, -0.2, 0.3, 1.0]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let config = OracleConfig { max_steps: 1, ..Default::default() };
        assert!(matches!(
            dual_ascent_solve(&q, &t, &config),
            Err(Error::OracleDidNotConverge { steps: 1, .. })
        ));
    }
}
