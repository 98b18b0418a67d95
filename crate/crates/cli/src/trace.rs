//! Convergence trace as CSV: one row per axis per sweep.

use std::io::{self, Write};

use signed_sinkhorn::SweepRecord;

pub const HEADER: &str = "iteration,axis,residual,dual_value";

/// Iterations count from 1, axes from 0. `residual` is the axis's residual
/// norm after the sweep; `dual_value` is the dual right after that axis was
/// updated.
pub fn write_trace<W: Write>(mut w: W, trace: &[SweepRecord]) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for (k, record) in trace.iter().enumerate() {
        for (axis, residual) in record.residuals.iter().enumerate() {
            let dual = record.dual_values.get(axis).copied().unwrap_or(f64::NAN);
            writeln!(w, "{},{axis},{residual:e},{dual}", k + 1)?;
        }
    }
    w.flush()
}
