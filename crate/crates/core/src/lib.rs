//! Calibration of sign-indefinite multi-dimensional arrays to positive
//! per-axis marginals.
//!
//! A prior `Q` with entries of either sign is revised into a posterior `P`
//! that keeps the sign pattern of `Q`, matches a positive target vector on
//! every axis, and minimizes the signed relative entropy
//! `Σ |P| (log(|P| / |Q|) - 1)`. The minimizer has the form
//! `P = Q · Π α^sign(Q)`: positive entries are scaled by the per-axis factors
//! and negative entries by their inverses. The factors are found by cyclic
//! coordinate ascent on the dual, where each coordinate update is the
//! positive root of `S⁺α² - pα - S⁻ = 0`. When `Q` is strictly positive this
//! is the classical Sinkhorn iteration.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod calibrate;
pub mod duality;
pub mod oracle;
pub mod tensor;

pub use calibrate::{
    axis_partial_sums, calibrate, classic_update, diagnose, partial_sums, residuals,
    signed_update, sweep_axis, validate_problem, Calibration, CalibrationConfig,
    CalibrationError, CalibrationReport, Calibrator, Diagnostics, ResidualNorm, SliceError, Status, SweepRecord,
};
pub use duality::{
    dual_gradient, dual_value, multipliers_from_scaling, posterior_from_multipliers,
    relative_entropy, scaling_from_multipliers, Multipliers,
};
pub use error::{Error, Result, SliceRef};
pub use oracle::{dual_ascent_solve, generate_feasible_instance, OracleConfig, OracleSolution};
pub use tensor::{
    assemble_posterior, sign_split, MarginalTargets, ScalingState, SignedTensor, Summation,
};
