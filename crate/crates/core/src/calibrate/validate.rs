//! Necessary feasibility checks run before any iteration.

use alloc::vec::Vec;

use crate::error::{Error, Result, SliceRef};
use crate::math;
use crate::tensor::{MarginalTargets, SignedTensor};

/// Relative tolerance on the agreement of per-axis target totals.
pub const TOTAL_TOLERANCE: f64 = 1e-9;

/// What [`diagnose`] found about a prior/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub target_totals: Vec<f64>,
    /// Signed marginals of the prior, one vector per axis.
    pub prior_marginals: Vec<Vec<f64>>,
    /// Slice sums of the positive part of the prior.
    pub positive_mass: Vec<Vec<f64>>,
    /// Slices with a positive target but no positive prior entry.
    pub infeasible_slices: Vec<SliceRef>,
    /// First pair of axes whose target totals disagree.
    pub total_mismatch: Option<(usize, usize)>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.total_mismatch.is_none() && self.infeasible_slices.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if let Some((a, b)) = self.total_mismatch {
            return Err(Error::InconsistentTotals {
                axis_a: a,
                total_a: self.target_totals[a],
                axis_b: b,
                total_b: self.target_totals[b],
            });
        }
        if !self.infeasible_slices.is_empty() {
            return Err(Error::StructurallyInfeasible { slices: self.infeasible_slices.clone() });
        }
        Ok(())
    }
}

/// Runs the necessary checks without failing on them; only a shape
/// mismatch between prior and targets is an error here.
pub fn diagnose(q: &SignedTensor, targets: &MarginalTargets) -> Result<Diagnostics> {
    targets.conform(q)?;
    let target_totals = targets.totals();
    let reference = target_totals[0];
    let total_mismatch = target_totals
        .iter()
        .position(|&t| {
            let scale = math::abs(reference).max(math::abs(t));
            math::abs(t - reference) > TOTAL_TOLERANCE * scale
        })
        .map(|b| (0, b));

    let (plus, _) = q.sign_split();
    let positive_mass: Vec<Vec<f64>> = (0..q.ndim())
        .map(|axis| plus.axis_marginal(axis).expect("axis in range"))
        .collect();
    let infeasible_slices = positive_mass
        .iter()
        .enumerate()
        .flat_map(|(axis, mass)| {
            mass.iter()
                .enumerate()
                .filter(|&(_, &m)| m <= 0.0)
                .map(move |(index, _)| SliceRef { axis, index })
        })
        .collect();

    let prior_marginals = (0..q.ndim())
        .map(|axis| q.axis_marginal(axis).expect("axis in range"))
        .collect();

    Ok(Diagnostics { target_totals, prior_marginals, positive_mass, infeasible_slices, total_mismatch })
}

/// [`diagnose`] followed by [`Diagnostics::check`].
pub fn validate_problem(q: &SignedTensor, targets: &MarginalTargets) -> Result<Diagnostics> {
    let d = diagnose(q, targets)?;
    d.check()?;
    Ok(d)
}
