use std::path::PathBuf;

use signed_sinkhorn::{CalibrationError, Error, Status};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad command-line arguments.
    pub const USAGE: i32 = 2;
    /// Unreadable file, malformed JSON, or a file that breaks a format invariant.
    pub const INPUT: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const MAX_ITERATIONS: i32 = 5;
    pub const NUMERICAL_FAILURE: i32 = 6;
    /// `--oracle` disagreed with the sweep result.
    pub const ORACLE_MISMATCH: i32 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: invalid JSON: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: Error },
    /// The files are individually valid but do not fit together.
    #[error("{context}: {source}")]
    Problem { context: String, source: Error },
    #[error("{context}: {source}")]
    Calibration { context: String, source: Box<CalibrationError> },
    #[error("{context}: oracle disagrees: max |P - P_oracle| = {deviation:e} exceeds {tolerance:e}")]
    OracleMismatch { context: String, deviation: f64, tolerance: f64 },
    #[error("{context}: oracle failed: {source}")]
    Oracle { context: String, source: Error },
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::AxisCountMismatch { .. }
        | Error::AxisLengthMismatch { .. }
        | Error::ShapeMismatch { .. }
        | Error::InvalidConfig(_) => exit::INPUT,
        e => match e.status() {
            Status::Infeasible => exit::INFEASIBLE,
            _ => exit::NUMERICAL_FAILURE,
        },
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Invalid { .. } => exit::INPUT,
            CliError::Problem { source, .. } => code_for(source),
            CliError::Calibration { source, .. } => code_for(&source.error),
            CliError::OracleMismatch { .. } | CliError::Oracle { .. } => exit::ORACLE_MISMATCH,
        }
    }
}
