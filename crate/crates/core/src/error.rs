use alloc::vec::Vec;
use core::fmt;

use crate::calibrate::Status;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// One slice of a tensor: all entries whose index along `axis` equals `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceRef {
    pub axis: usize,
    pub index: usize,
}

impl fmt::Display for SliceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axis {} index {}", self.axis, self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyShape,
    ZeroExtent { axis: usize },
    LengthMismatch { expected: usize, found: usize },
    NonFiniteEntry { index: Vec<usize>, value: f64 },
    AxisOutOfRange { axis: usize, axes: usize },
    IndexOutOfRange { axis: usize, index: usize, len: usize },
    AxisCountMismatch { expected: usize, found: usize },
    AxisLengthMismatch { axis: usize, expected: usize, found: usize },
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    NonPositiveTarget { axis: usize, index: usize, value: f64 },
    NonPositiveScaling { axis: usize, index: usize, value: f64 },
    NonFiniteMultiplier { axis: usize, index: usize },
    InconsistentTotals { axis_a: usize, total_a: f64, axis_b: usize, total_b: f64 },
    StructurallyInfeasible { slices: Vec<SliceRef> },
    /// `S⁺ = 0` while `S⁻ > 0`: the signed slice sum is negative for every scaling.
    InfeasibleSlice { slice: SliceRef },
    /// `S⁺ = S⁻ = 0`: the slice carries no mass at all.
    DegenerateSlice { slice: SliceRef },
    NumericalFailure { what: &'static str, axis: Option<usize>, index: Vec<usize> },
    SignMismatch { index: Vec<usize> },
    SupportViolation { index: Vec<usize> },
    InvalidConfig(&'static str),
    OracleDidNotConverge { steps: usize, gradient_norm: f64 },
    GeneratorFailed { attempts: usize },
}

impl Error {
    /// Calibration status this error terminates a run with.
    pub fn status(&self) -> Status {
        match self {
            Error::StructurallyInfeasible { .. }
            | Error::InfeasibleSlice { .. }
            | Error::DegenerateSlice { .. }
            | Error::InconsistentTotals { .. }
            | Error::NonPositiveTarget { .. } => Status::Infeasible,
            _ => Status::NumericalFailure,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.status() == Status::Infeasible
    }

    pub(crate) fn non_finite(what: &'static str, axis: Option<usize>, index: Vec<usize>) -> Self {
        Error::NumericalFailure { what, axis, index }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyShape => f.write_str("shape must have at least one axis"),
            Error::ZeroExtent { axis } => write!(f, "axis {axis} has zero length"),
            Error::LengthMismatch { expected, found } => write!(
                f,
                "data length {found} does not match shape (expected {expected} values)"
            ),
            Error::NonFiniteEntry { index, value } => {
                write!(f, "non-finite value {value} at index {index:?}")
            }
            Error::AxisOutOfRange { axis, axes } => {
                write!(f, "axis {axis} out of range for a tensor with {axes} axes")
            }
            Error::IndexOutOfRange { axis, index, len } => {
                write!(f, "index {index} out of range on axis {axis} of length {len}")
            }
            Error::AxisCountMismatch { expected, found } => {
                write!(f, "expected {expected} axes, found {found}")
            }
            Error::AxisLengthMismatch { axis, expected, found } => write!(
                f,
                "axis {axis} has length {found}, expected {expected}"
            ),
            Error::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left:?} vs {right:?}")
            }
            Error::NonPositiveTarget { axis, index, value } => write!(
                f,
                "target on axis {axis} index {index} is {value}; marginals must be strictly positive"
            ),
            Error::NonPositiveScaling { axis, index, value } => write!(
                f,
                "scaling factor on axis {axis} index {index} is {value}; factors must be positive and finite"
            ),
            Error::NonFiniteMultiplier { axis, index } => {
                write!(f, "multiplier on axis {axis} index {index} is not finite")
            }
            Error::InconsistentTotals { axis_a, total_a, axis_b, total_b } => write!(
                f,
                "target totals disagree: axis {axis_a} sums to {total_a} but axis {axis_b} sums to {total_b}"
            ),
            Error::StructurallyInfeasible { slices } => {
                f.write_str("structurally infeasible: no positive prior entries in ")?;
                for (k, s) in slices.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            Error::InfeasibleSlice { slice } => write!(
                f,
                "infeasible slice at {slice}: only negative entries, positive target"
            ),
            Error::DegenerateSlice { slice } => {
                write!(f, "degenerate slice at {slice}: no mass to scale")
            }
            Error::NumericalFailure { what, axis, index } => {
                write!(f, "non-finite {what}")?;
                if let Some(axis) = axis {
                    write!(f, " on axis {axis}")?;
                }
                if !index.is_empty() {
                    write!(f, " at index {index:?}")?;
                }
                Ok(())
            }
            Error::SignMismatch { index } => {
                write!(f, "posterior sign differs from prior sign at index {index:?}")
            }
            Error::SupportViolation { index } => write!(
                f,
                "posterior is nonzero where the prior is zero at index {index:?}"
            ),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::OracleDidNotConverge { steps, gradient_norm } => write!(
                f,
                "dual ascent stopped after {steps} steps with gradient norm {gradient_norm:e}"
            ),
            Error::GeneratorFailed { attempts } => write!(
                f,
                "could not build a feasible instance in {attempts} attempts; lower the negative fraction"
            ),
        }
    }
}

impl core::error::Error for Error {}
