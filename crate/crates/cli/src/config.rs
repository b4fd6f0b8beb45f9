use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use efc::samplers::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "efc", version, about = "Poisson-Dirichlet fragmentation-coalescence toolkit")]
pub struct RunConfig {
    /// Write the artifact here instead of stdout (or $EFC_OUTPUT_DIR/<command>.<ext>).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Rational parameters, given as `p/q` or `p`.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pitman's sampling formula for one block-size vector.
    Eppf {
        #[command(flatten)]
        params: ParamArgs,
        /// Block sizes, comma separated.
        #[arg(long)]
        shape: String,
    },
    /// Coagulation and fragmentation rates for states of P_[n], as CSV.
    Rates {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
    },
    /// Audit detailed balance of the restricted PD law; exit code 2 on failure.
    VerifyDb {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
    },
    /// Solve for the stationary law and compare it with the restricted PD law.
    Stationary {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
    },
    /// Draw replicas from one of the samplers, as JSON lines.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        #[command(flatten)]
        params: ParamArgs,
        /// Ground-set size for partition samplers.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        replicas: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Maximum number of sticks for gem / pd.
        #[arg(long, default_value_t = 10_000)]
        trunc: usize,
        /// Paint-box masses (comma separated, summing to one).
        #[arg(long)]
        masses: Option<String>,
    },
    /// TV distance to equilibrium over a geometric time grid, as CSV.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Number of grid points, including t = 0.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Initial state in block notation, e.g. "1 3|2"; defaults to the single block.
        #[arg(long)]
        initial: Option<String>,
    },
    /// Long-run statistics of the discrete split-and-merge chain, as JSON.
    SplitMerge {
        /// Total number of moves, burn-in included.
        #[arg(long, default_value_t = 1_100_000)]
        steps: usize,
        #[arg(long, default_value_t = 100_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Replicas for the direct GEM(1) comparison; 0 disables it.
        #[arg(long, default_value_t = 100_000)]
        direct_replicas: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// GEM(theta) sticks in size-biased order.
    Gem,
    /// Ranked PD(alpha, theta) by residual allocation.
    Pd,
    /// Chinese restaurant partitions of [n].
    Crp,
    /// Paint-box partitions of [n] from --masses.
    Paintbox,
}

impl Command {
    /// File stem and extension used with $EFC_OUTPUT_DIR.
    pub fn artifact_name(&self) -> (&'static str, &'static str) {
        match self {
            Command::Eppf { .. } => ("eppf", "txt"),
            Command::Rates { .. } => ("rates", "csv"),
            Command::VerifyDb { .. } => ("verify-db", "json"),
            Command::Stationary { .. } => ("stationary", "json"),
            Command::Sample { .. } => ("sample", "jsonl"),
            Command::Simulate { .. } => ("simulate", "csv"),
            Command::SplitMerge { .. } => ("split-merge", "json"),
        }
    }
}
