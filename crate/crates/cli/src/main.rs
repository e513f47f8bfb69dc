use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lglrr::lglrr::SolverConfig;

mod commands;

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NOT_CONVERGED: u8 = 4;
    pub const CUT_LOCUS: u8 = 5;
}

/// Environment variable limiting the worker thread count.
pub const THREADS_ENV: &str = "LGLRR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lglrr", version, about = "Cluster image sets as subspaces on the Grassmann manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic clustered dataset with ground truth.
    Synth(SynthArgs),
    /// Solve for the coefficient matrix and cluster a dataset.
    Cluster(ClusterArgs),
    /// Accuracy of predicted labels against ground truth.
    Eval(EvalArgs),
    /// Vary one parameter and record the accuracy for each value.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of clusters.
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub per_cluster: usize,
    /// Ambient dimension.
    #[arg(long)]
    pub d: usize,
    /// Subspace dimension.
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    /// Manifest listing the image sets.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Subspace dimension used to represent each set.
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    /// Standardize every frame to zero mean and unit variance before the SVD.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Neighborhood size.
    #[arg(long, default_value_t = 10)]
    pub c: usize,
    /// Number of clusters; inferred from manifest labels when omitted.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.9)]
    pub rho0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta0: f64,
    #[arg(long, default_value_t = 1e6)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub eps1: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub eps2: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Override the proximal constant (default: max ||B_i||^2 + N + 1).
    #[arg(long)]
    pub eta_w: Option<f64>,
}

impl SolverArgs {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            neighbors: self.c,
            rho0: self.rho0,
            beta0: self.beta0,
            beta_max: self.beta_max,
            eps1: self.eps1,
            eps2: self.eps2,
            max_iters: self.max_iters,
            eta_w_override: self.eta_w,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels CSV (`id,label`).
    pub predicted: PathBuf,
    /// Ground-truth labels CSV (`id,label`).
    pub truth: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Lambda,
    C,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated grid of values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Vec<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool may already exist; the default one is fine in that case
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let code = match cli.command {
        Command::Synth(args) => commands::synth(&args),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    ExitCode::from(code)
}
