use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use signed_sinkhorn::{
    calibrate, diagnose, dual_ascent_solve, generate_feasible_instance, relative_entropy, CalibrationConfig,
    CalibrationReport, MarginalTargets, OracleConfig, SignedTensor, Status,
};

use crate::args::{CalibrateArgs, Cli, Command, EntropyArgs, GenerateArgs, InputArgs};
use crate::error::{exit, CliError};
use crate::format::{read_marginals, read_problem, read_tensor, write_marginals, write_tensor};
use crate::trace::write_trace;

/// Inputs with more entries than this skip the `--oracle` cross-check.
pub const ORACLE_MAX_ENTRIES: usize = 4096;
/// Largest accepted elementwise gap between the sweep and oracle posteriors.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Runs a parsed command, writing reports to `out`. Returns the exit code
/// for outcomes that are not errors.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Calibrate(args) => cmd_calibrate(&args, out),
        Command::Validate(args) => cmd_validate(&args, out),
        Command::Entropy(args) => cmd_entropy(&args, out),
        Command::Generate(args) => cmd_generate(&args, out),
    }
}

struct Problem {
    prior: SignedTensor,
    targets: MarginalTargets,
    context: String,
}

fn load(input: &InputArgs) -> Result<Problem, CliError> {
    match (&input.problem, &input.prior, &input.marginals) {
        (Some(path), _, _) => {
            let (prior, targets) = read_problem(path)?;
            Ok(Problem { prior, targets, context: path.display().to_string() })
        }
        (None, Some(p), Some(m)) => Ok(Problem {
            prior: read_tensor(p)?,
            targets: read_marginals(m)?,
            context: format!("prior {} with marginals {}", p.display(), m.display()),
        }),
        _ => unreachable!("clap requires --problem or both --prior and --marginals"),
    }
}

fn write_stdout(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(line)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn summary(report: &CalibrationReport) -> String {
    let r = if report.final_residuals.is_empty() {
        "nan".to_string()
    } else {
        format!("{:e}", report.max_residual())
    };
    format!("status={} iterations={} max_residual={r}", report.status, report.iterations)
}

fn save_trace(path: &Path, report: &CalibrationReport) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_owned(), source };
    let file = File::create(path).map_err(io)?;
    write_trace(BufWriter::new(file), &report.trace).map_err(io)
}

pub fn cmd_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let Problem { prior, targets, context } = load(&args.input)?;
    let config = CalibrationConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        residual_norm: args.norm.into(),
        record_trace: args.trace.is_some(),
        ..Default::default()
    };
    let result = calibrate(&prior, &targets, &config);
    let report = match &result {
        Ok(c) => &c.report,
        Err(e) => &e.report,
    };
    if let Some(path) = &args.trace {
        save_trace(path, report)?;
    }
    write_stdout(out, format_args!("{}", summary(report)))?;
    let calibration = result.map_err(|source| CliError::Calibration { context: context.clone(), source: Box::new(source) })?;
    write_tensor(&args.out, &calibration.posterior)?;

    if calibration.report.status != Status::Converged {
        return Ok(exit::MAX_ITERATIONS);
    }
    if args.oracle {
        if prior.len() > ORACLE_MAX_ENTRIES {
            write_stdout(out, format_args!("oracle=skipped entries={} limit={ORACLE_MAX_ENTRIES}", prior.len()))?;
            return Ok(exit::OK);
        }
        let solution = dual_ascent_solve(&prior, &targets, &OracleConfig::default())
            .map_err(|source| CliError::Oracle { context: context.clone(), source })?;
        let deviation = calibration
            .posterior
            .values()
            .iter()
            .zip(solution.posterior.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        write_stdout(out, format_args!("oracle max_abs_diff={deviation:e} steps={}", solution.steps))?;
        if deviation.is_nan() || deviation > ORACLE_TOLERANCE {
            return Err(CliError::OracleMismatch { context, deviation, tolerance: ORACLE_TOLERANCE });
        }
    }
    Ok(exit::OK)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn cmd_validate(args: &InputArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let Problem { prior, targets, context } = load(args)?;
    let d = diagnose(&prior, &targets).map_err(|source| CliError::Problem { context, source })?;
    write_stdout(out, format_args!("target_totals: {}", join(&d.target_totals)))?;
    match d.total_mismatch {
        None => write_stdout(out, format_args!("total_mass: ok"))?,
        Some((a, b)) => write_stdout(
            out,
            format_args!(
                "total_mass: mismatch: axis {a} sums to {} but axis {b} sums to {}",
                d.target_totals[a], d.target_totals[b]
            ),
        )?,
    }
    for (axis, m) in d.prior_marginals.iter().enumerate() {
        write_stdout(out, format_args!("prior_marginal axis={axis}: {}", join(m)))?;
    }
    if d.infeasible_slices.is_empty() {
        write_stdout(out, format_args!("infeasible_slices: none"))?;
    } else {
        let list: Vec<String> = d.infeasible_slices.iter().map(ToString::to_string).collect();
        write_stdout(out, format_args!("infeasible_slices: {}", list.join("; ")))?;
    }
    let ok = d.is_ok();
    write_stdout(out, format_args!("result: {}", if ok { "pass" } else { "fail" }))?;
    Ok(if ok { exit::OK } else { exit::INFEASIBLE })
}

pub fn cmd_entropy(args: &EntropyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = read_tensor(&args.p)?;
    let q = read_tensor(&args.q)?;
    let value = relative_entropy(&p, &q).map_err(|source| CliError::Invalid { path: args.p.clone(), source })?;
    write_stdout(out, format_args!("{value}"))?;
    Ok(exit::OK)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (prior, targets) = generate_feasible_instance(&args.shape, args.negative_fraction, args.seed)
        .map_err(|source| CliError::Problem { context: "generate".into(), source })?;
    write_tensor(&args.prior, &prior)?;
    write_marginals(&args.marginals, &targets)?;
    write_stdout(
        out,
        format_args!(
            "entries={} positive={} negative={}",
            prior.len(),
            prior.positive_count(),
            prior.negative_count()
        ),
    )?;
    Ok(exit::OK)
}
