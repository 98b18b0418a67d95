use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use signed_sinkhorn::ResidualNorm;

#[derive(Debug, Parser)]
#[command(name = "signed-sinkhorn", version, about = "Calibrate signed tensors to positive marginals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the generalized Sinkhorn iteration and write the posterior.
    Calibrate(CalibrateArgs),
    /// Check the necessary feasibility conditions without iterating.
    Validate(InputArgs),
    /// Print the signed relative entropy S(P, Q).
    Entropy(EntropyArgs),
    /// Write a random feasible prior and matching targets.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Prior tensor JSON.
    #[arg(long, required_unless_present = "problem", requires = "marginals")]
    pub prior: Option<PathBuf>,
    /// Marginal targets JSON.
    #[arg(long, required_unless_present = "problem", requires = "prior")]
    pub marginals: Option<PathBuf>,
    /// Problem JSON holding both the prior and the marginals.
    #[arg(long, conflicts_with_all = ["prior", "marginals"])]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
    Linf,
}

impl From<NormArg> for ResidualNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => ResidualNorm::L1,
            NormArg::L2 => ResidualNorm::L2,
            NormArg::Linf => ResidualNorm::Linf,
        }
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Where to write the posterior tensor JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Stop once every per-axis residual norm is at most this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Maximum number of full sweeps.
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    pub norm: NormArg,
    /// Write the per-sweep, per-axis convergence trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Cross-check the result against gradient ascent on the dual.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Posterior tensor JSON.
    #[arg(long)]
    pub p: PathBuf,
    /// Prior tensor JSON.
    #[arg(long)]
    pub q: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Comma-separated axis lengths, e.g. 14,14,12.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    #[arg(long = "negative-fraction", default_value_t = 0.02)]
    pub negative_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the prior tensor JSON.
    #[arg(long)]
    pub prior: PathBuf,
    /// Where to write the marginal targets JSON.
    #[arg(long)]
    pub marginals: PathBuf,
}
