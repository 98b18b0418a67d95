//! File formats and command-line front end for `signed-sinkhorn`.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod trace;

pub use error::{exit, CliError};
