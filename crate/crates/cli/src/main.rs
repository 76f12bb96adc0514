mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "adiaquant",
    version,
    about = "Adiabatic evolution and spectral analysis for small satisfiability instances"
)]
pub struct Cli {
    /// JSON file whose keys mirror the long flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Write the secondary JSON report here instead of stderr.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Largest qubit count a full-space state may use (default 24).
    #[arg(long, global = true)]
    pub cap: Option<usize>,

    /// Initial Hamiltonian weights: clause-weighted (default) or uniform.
    #[arg(long, global = true)]
    pub initial: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest levels of H(s) on a uniform grid, as CSV.
    Spectrum(SpectrumArgs),
    /// Minimum gap between the two lowest levels, as JSON.
    Gap(GapArgs),
    /// Run the adiabatic algorithm and sample the final state.
    Evolve(EvolveArgs),
    /// Gap versus problem size for a built-in family, as CSV plus fits.
    Scaling(ScalingArgs),
    /// Compile the evolution into a gate sequence.
    Trotter(TrotterArgs),
    /// Exhaustive classical solution.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Instance file in the `p asat <n> <m>` format.
    pub instance: Option<PathBuf>,

    /// Built-in family: ring, grover, bush, bush-uniform or overconstrained.
    #[arg(long, conflicts_with = "instance")]
    pub family: Option<String>,

    /// Family size.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub target: TargetArgs,

    /// Number of levels (default 8, capped by the dimension).
    #[arg(long)]
    pub levels: Option<usize>,

    /// Grid points on [0, 1] (default 1000).
    #[arg(long)]
    pub grid: Option<usize>,

    /// full, negation or symmetric.
    #[arg(long)]
    pub sector: Option<String>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub target: TargetArgs,

    #[arg(long)]
    pub sector: Option<String>,

    /// Coarse grid points before refinement.
    #[arg(long)]
    pub coarse: Option<usize>,

    /// Golden-section tolerance in s.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Also estimate the adiabatic time scale.
    #[arg(long)]
    pub estimate: bool,

    /// Multiplier on the time scale for the suggested T (default 10).
    #[arg(long)]
    pub safety: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    pub instance: Option<PathBuf>,

    /// Total evolution time.
    #[arg(long = "T", visible_alias = "time")]
    pub total_time: Option<f64>,

    /// RK4 step (default 0.01 over the norm bound).
    #[arg(long)]
    pub dt: Option<f64>,

    /// Measurement samples (default 1000).
    #[arg(long)]
    pub shots: Option<usize>,

    /// Sampling seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Overlap counted as success (default 0.99).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub family: Option<String>,

    /// Inclusive range `a..b` or `a..b..step`.
    #[arg(long)]
    pub n_range: Option<String>,

    #[arg(long)]
    pub coarse: Option<usize>,

    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrotterArgs {
    pub instance: Option<PathBuf>,

    #[arg(long = "T", visible_alias = "time")]
    pub total_time: Option<f64>,

    /// Target state error (default 0.01).
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Run the gates and the continuous evolution and compare them.
    #[arg(long)]
    pub execute: bool,

    /// Override the planned number of time slices.
    #[arg(long)]
    pub slices: Option<usize>,

    /// Override the planned substeps per slice.
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ADIAQUANT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("ADIAQUANT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| commands::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adiaquant: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
