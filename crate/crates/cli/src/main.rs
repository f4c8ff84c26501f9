//! `fmsm`: generate, solve, analyse and benchmark fair submodular
//! maximisation instances. Every command reads and writes JSON.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fmsm::instance::{MatroidKind, ObjectiveKind};
use fmsm::solvers::SolverName;

use error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "fmsm",
    version,
    about = "Fair submodular maximization over matroid constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run a solver, possibly repeatedly, and write its reports.
    Solve(SolveArgs),
    /// Minimum-norm quantities, excess ratio and feasibility of an instance.
    Analyze(InstanceArgs),
    /// Exact optimum by enumeration (at most 16 elements).
    Bruteforce(InstanceArgs),
    /// Run solvers over a corpus and aggregate ratios and violations.
    Bench(BenchArgs),
    /// Parse and validate an instance; exits 4 if it has no feasible set.
    Validate(InstanceArgs),
}

#[derive(Debug, Subcommand)]
enum GenFamily {
    /// Random feasible instance.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        colors: usize,
        #[arg(long, default_value = "uniform")]
        matroid: MatroidKind,
        #[arg(long, default_value = "coverage")]
        objective: ObjectiveKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrality-gap family with `t` paths of `2s + 1` edges.
    Gap {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fair submodular welfare with `agents × items` elements.
    Welfare {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long, default_value_t = 2)]
        colors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubKind {
    LocalSearch,
    RandomGreedy,
}

/// Solver parameters shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
struct Params {
    /// Fraction of each lower bound protected by the two-pass solver.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Step parameter of the continuous optimisers and improvement threshold
    /// of local search.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Largest number of elements swapped in or out by local search.
    #[arg(long, default_value_t = 1)]
    swap_size: usize,
    /// Samples per multilinear estimate on ground sets too large for exact
    /// evaluation.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, value_enum, default_value_t = SubKind::LocalSearch)]
    sub: SubKind,
    /// Use this ratio for the sub-solver instead of calibrating it.
    #[arg(long)]
    alpha_hat: Option<f64>,
    /// Skip the brute-force optimum.
    #[arg(long)]
    no_opt: bool,
    /// Record wall-clock time per run (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solver: SolverName,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Instance files; may be repeated.
    #[arg(long)]
    instance: Vec<PathBuf>,
    /// Directory whose `*.json` files are added to the corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated solver names; all solvers by default.
    #[arg(long, value_delimiter = ',')]
    solver: Vec<SolverName>,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("FMSM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "FMSM_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Gen { family } => commands::gen(family),
        Command::Solve(args) => commands::solve(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Bruteforce(args) => commands::bruteforce(args),
        Command::Bench(args) => commands::bench(args),
        Command::Validate(args) => commands::validate(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("fmsm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
