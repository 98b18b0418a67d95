//! Generalized Sinkhorn iteration.
//!
//! Starting from unit factors, each sweep re-solves the factors of every axis
//! in ascending axis order. A factor update is the exact maximizer of the dual
//! along that coordinate, so the dual value never decreases. For a strictly
//! positive prior the update collapses to the Sinkhorn ratio `p / S`.

mod update;
mod validate;

use alloc::vec::Vec;

pub use update::{
    axis_partial_sums, classic_update, partial_sums, signed_update, sweep_axis, SliceError,
};
pub use validate::{diagnose, validate_problem, Diagnostics, TOTAL_TOLERANCE};

use crate::duality::{dual_value, multipliers_from_scaling};
use crate::error::{Error, Result};
use crate::math;
use crate::tensor::{assemble_posterior, MarginalTargets, ScalingState, SignedTensor, Summation};

/// Vector norm applied to each axis's marginal residual.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ResidualNorm {
    L1,
    #[default]
    L2,
    Linf,
}

impl ResidualNorm {
    pub fn apply(self, v: impl IntoIterator<Item = f64>) -> f64 {
        let it = v.into_iter().map(math::abs);
        match self {
            ResidualNorm::L1 => it.sum(),
            ResidualNorm::L2 => math::sqrt(it.map(|x| x * x).sum()),
            ResidualNorm::Linf => it.fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    /// Stop once every per-axis residual norm is at most this.
    pub tolerance: f64,
    /// Limit on full sweeps over all axes.
    pub max_iterations: usize,
    pub residual_norm: ResidualNorm,
    /// Keep per-sweep residuals and dual values in the report.
    pub record_trace: bool,
    pub summation: Summation,
    /// Use `p / S` directly when the prior has no negative entries.
    pub classic_fast_path: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            tolerance: 1e-12,
            max_iterations: 1000,
            residual_norm: ResidualNorm::L2,
            record_trace: false,
            summation: Summation::Sequential,
            classic_fast_path: true,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive and finite"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::Infeasible => "Infeasible",
            Status::NumericalFailure => "NumericalFailure",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one full sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Per-axis residual norms measured after the sweep.
    pub residuals: Vec<f64>,
    /// Dual value after each axis update; empty unless tracing.
    pub dual_values: Vec<f64>,
}

impl SweepRecord {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub status: Status,
    pub iterations: usize,
    pub trace: Vec<SweepRecord>,
    pub final_residuals: Vec<f64>,
}

impl CalibrationReport {
    pub fn max_residual(&self) -> f64 {
        self.final_residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub posterior: SignedTensor,
    pub scaling: ScalingState,
    pub report: CalibrationReport,
}

/// Step-by-step driver over a validated problem.
#[derive(Debug, Clone)]
pub struct Calibrator<'a> {
    prior: &'a SignedTensor,
    targets: &'a MarginalTargets,
    plus: SignedTensor,
    minus: SignedTensor,
    config: CalibrationConfig,
    scaling: ScalingState,
    iterations: usize,
    classic: bool,
}

impl<'a> Calibrator<'a> {
    pub fn new(prior: &'a SignedTensor, targets: &'a MarginalTargets, config: CalibrationConfig) -> Result<Self> {
        config.validate()?;
        validate_problem(prior, targets)?;
        let (plus, minus) = prior.sign_split();
        let classic = config.classic_fast_path && !prior.has_negative();
        Ok(Calibrator {
            prior,
            targets,
            plus,
            minus,
            config,
            scaling: ScalingState::ones(prior.shape()),
            iterations: 0,
            classic,
        })
    }

    pub fn scaling(&self) -> &ScalingState {
        &self.scaling
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// True when the classical ratio is used instead of the quadratic root.
    pub fn uses_classic_path(&self) -> bool {
        self.classic
    }

    pub fn posterior(&self) -> Result<SignedTensor> {
        assemble_posterior(self.prior, &self.scaling)
    }

    /// Updates one axis only; does not count as an iteration.
    pub fn update_axis(&mut self, axis: usize) -> Result<()> {
        update::sweep_axis_with(
            &self.plus,
            &self.minus,
            &mut self.scaling,
            axis,
            self.targets,
            self.config.summation,
            self.classic,
        )
    }

    /// One full sweep over all axes in ascending order.
    pub fn sweep(&mut self) -> Result<SweepRecord> {
        let mut dual_values = Vec::new();
        for axis in 0..self.prior.ndim() {
            self.update_axis(axis)?;
            if self.config.record_trace {
                let m = multipliers_from_scaling(&self.scaling);
                dual_values.push(dual_value(self.prior, self.targets, &m)?);
            }
        }
        self.iterations += 1;
        let residuals = residuals_with(
            self.prior,
            &self.scaling,
            self.targets,
            self.config.residual_norm,
            self.config.summation,
        )?;
        Ok(SweepRecord { residuals, dual_values })
    }
}

/// A run that stopped early, with everything recorded up to that point.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationError {
    pub error: Error,
    /// Status is `Infeasible` or `NumericalFailure`.
    pub report: CalibrationReport,
}

impl core::fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} after {} iterations: {}", self.report.status, self.report.iterations, self.error)
    }
}

impl core::error::Error for CalibrationError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<CalibrationError> for Error {
    fn from(e: CalibrationError) -> Self {
        e.error
    }
}

/// Runs sweeps from unit factors until every per-axis residual is within
/// tolerance or the iteration limit is reached.
///
/// Hitting the limit is not an error: the report says `MaxIterations`.
/// Invalid input, infeasible slices and non-finite values stop the run and
/// come back with the partial report.
pub fn calibrate(
    prior: &SignedTensor,
    targets: &MarginalTargets,
    config: &CalibrationConfig,
) -> Result<Calibration, CalibrationError> {
    let mut trace = Vec::new();
    let mut final_residuals = Vec::new();
    let fail = |error: Error, iterations, trace, final_residuals| CalibrationError {
        report: CalibrationReport { status: error.status(), iterations, trace, final_residuals },
        error,
    };
    let mut calibrator = match Calibrator::new(prior, targets, config.clone()) {
        Ok(c) => c,
        Err(e) => return Err(fail(e, 0, trace, final_residuals)),
    };
    let status = loop {
        let record = match calibrator.sweep() {
            Ok(r) => r,
            Err(e) => return Err(fail(e, calibrator.iterations(), trace, final_residuals)),
        };
        let done = record.max_residual() <= config.tolerance;
        final_residuals.clone_from(&record.residuals);
        if config.record_trace {
            trace.push(record);
        }
        if done {
            break Status::Converged;
        }
        if calibrator.iterations() >= config.max_iterations {
            break Status::MaxIterations;
        }
    };
    let iterations = calibrator.iterations();
    let posterior = match calibrator.posterior() {
        Ok(p) => p,
        Err(e) => return Err(fail(e, iterations, trace, final_residuals)),
    };
    Ok(Calibration {
        posterior,
        report: CalibrationReport { status, iterations, trace, final_residuals },
        scaling: calibrator.scaling,
    })
}

/// Per-axis norm of the signed marginals of the assembled posterior minus
/// the targets.
pub fn residuals(
    prior: &SignedTensor,
    scaling: &ScalingState,
    targets: &MarginalTargets,
    norm: ResidualNorm,
) -> Result<Vec<f64>> {
    residuals_with(prior, scaling, targets, norm, Summation::Sequential)
}

fn residuals_with(
    prior: &SignedTensor,
    scaling: &ScalingState,
    targets: &MarginalTargets,
    norm: ResidualNorm,
    summation: Summation,
) -> Result<Vec<f64>> {
    targets.conform(prior)?;
    let posterior = assemble_posterior(prior, scaling)?;
    Ok((0..prior.ndim())
        .map(|axis| {
            let m = posterior.axis_marginal_with(axis, summation).expect("axis in range");
            norm.apply(m.iter().zip(targets.axis(axis)).map(|(a, b)| a - b))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn norms() {
        let v = [3.0, -4.0];
        assert_eq!(ResidualNorm::L1.apply(v), 7.0);
        assert_eq!(ResidualNorm::L2.apply(v), 5.0);
        assert_eq!(ResidualNorm::Linf.apply(v), 4.0);
        assert_eq!(ResidualNorm::L2.apply([]), 0.0);
    }

    #[test]
    fn feasible_uniform_prior_converges_in_one_sweep() {
        let q = SignedTensor::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let c = calibrate(&q, &t, &CalibrationConfig::default()).unwrap();
        assert_eq!(c.report.status, Status::Converged);
        assert_eq!(c.report.iterations, 1);
        assert_eq!(c.posterior, q);
        assert!(c.scaling.as_slices().iter().flatten().all(|&a| a == 1.0));
    }

    #[test]
    fn max_iterations_is_reported_not_raised() {
        let q = SignedTensor::new(vec![2, 2], vec![1.0, -0.5, 0.3, 1.0]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let config = CalibrationConfig { max_iterations: 2, record_trace: true, ..Default::default() };
        let c = calibrate(&q, &t, &config).unwrap();
        assert_eq!(c.report.status, Status::MaxIterations);
        assert_eq!(c.report.iterations, 2);
        assert_eq!(c.report.trace.len(), 2);
        assert_eq!(c.report.trace[0].dual_values.len(), 2);
        assert!(c.report.max_residual() > config.tolerance);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let q = SignedTensor::new(vec![1], vec![1.0]).unwrap();
        let t = MarginalTargets::new(vec![vec![1.0]]).unwrap();
        for config in [
            CalibrationConfig { tolerance: 0.0, ..Default::default() },
            CalibrationConfig { tolerance: f64::NAN, ..Default::default() },
            CalibrationConfig { max_iterations: 0, ..Default::default() },
        ] {
            let err = calibrate(&q, &t, &config).unwrap_err();
            assert!(matches!(err.error, Error::InvalidConfig(_)));
            assert_eq!(err.report.iterations, 0);
        }
    }

    #[test]
    fn structural_infeasibility_maps_to_status() {
        let q = SignedTensor::new(vec![2, 2], vec![1.0, 1.0, -1.0, 0.0]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let err = calibrate(&q, &t, &CalibrationConfig::default()).unwrap_err();
        assert_eq!(err.error.status(), Status::Infeasible);
        assert_eq!(err.report.status, Status::Infeasible);
    }

    #[test]
    fn positive_prior_takes_classic_path() {
        let q = SignedTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = MarginalTargets::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let c = Calibrator::new(&q, &t, CalibrationConfig::default()).unwrap();
        assert!(c.uses_classic_path());
        let off = CalibrationConfig { classic_fast_path: false, ..Default::default() };
        assert!(!Calibrator::new(&q, &t, off).unwrap().uses_classic_path());
    }
}
