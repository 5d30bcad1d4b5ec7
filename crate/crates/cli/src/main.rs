//! `varred`: grouping, evaluation and simulation of Pauli-sum measurement
//! schemes from the command line.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 violated
//! preconditions, 3 eigensolver non-convergence. `VARRED_THREADS` sets the
//! worker thread count.

mod artifact;
mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "varred", version, about = "Measurement schemes for Pauli-sum observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition or cover the terms of a Hamiltonian into commuting groups.
    Group(GroupArgs),
    /// Exact variance, bias and shot budget of a scheme on a state.
    Evaluate(EvaluateArgs),
    /// Repeat a scheme's estimator on simulated shots.
    Simulate(SimulateArgs),
    /// Turn a list of measurement settings into a cover.
    ImportSchedule(ImportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Qwc,
    Fc,
}

impl From<ModeArg> for varred::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Qwc => varred::Mode::Qwc,
            ModeArg::Fc => varred::Mode::Fc,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Ldf,
    Rlf,
    Gsc,
    Ilp,
    Cg,
    Ldvf,
    Lvf,
}

#[derive(clap::Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    /// Seconds for exact searches (ilp, cg).
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    /// Maximal-clique enumeration cap for gsc and ilp.
    #[arg(long, default_value_t = 1_000_000)]
    pub clique_cap: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Uniform,
    L1,
    L2,
    /// Proportional to schedule multiplicities.
    Counting,
    /// Minimizer of the overlapping-group variance bound.
    Opt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AllocArg {
    Uniform,
    L2,
    /// The cover's multiplicities as shot counts.
    Schedule,
}

#[derive(clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long)]
    pub maximalize: bool,
    #[arg(long)]
    pub cliffordize: bool,
    /// Sampling distribution of the randomized estimator.
    #[arg(long, value_enum, required_unless_present = "alloc")]
    pub dist: Option<DistArg>,
    /// Weight each term of the opt objective by its variance `1 − μ_P²`.
    #[arg(long)]
    pub known_variance: bool,
    /// Evaluate the deterministic estimator with this allocation instead.
    #[arg(long, value_enum, conflicts_with = "dist")]
    pub alloc: Option<AllocArg>,
    /// Total shots to round the allocation to.
    #[arg(long)]
    pub target: Option<u64>,
    /// Binary state file; the ground state is computed when absent.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0016)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SamplingArg {
    Aggregated,
    PerShot,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub report: PathBuf,
    /// Shots per repetition; defaults to the report's CLT shot count.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to the report's epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, value_enum, default_value = "aggregated")]
    pub sampling: SamplingArg,
    /// Defaults to `<out stem>.estimates.csv` next to `--out`.
    #[arg(long)]
    pub estimates_csv: Option<PathBuf>,
    /// Defaults to `<out stem>.qq.csv` next to `--out`.
    #[arg(long)]
    pub qq_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct ImportArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long)]
    pub cliffordize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("VARRED_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("VARRED_THREADS={value:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    // Usage errors exit 1 like any other malformed input; clap's default
    // would collide with the precondition code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Group(a) => commands::group::run(&a),
        Command::Evaluate(a) => commands::evaluate::run(&a),
        Command::Simulate(a) => commands::simulate::run(&a),
        Command::ImportSchedule(a) => commands::import::run(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
