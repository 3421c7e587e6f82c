use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bench;
mod commands;
mod failure;
mod report;

use failure::Failure;

/// Deterministic submodular maximization.
#[derive(Parser)]
#[command(name = "submax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unconstrained maximization (1/2-approximation).
    Usm(UsmArgs),
    /// Maximization subject to |S| <= k.
    Card(CardArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
    /// Sweep algorithms over instances and seeds, one CSV row per run.
    Bench(BenchArgs),
    /// Replay the cardinality algorithm on the tight instance.
    Tight(TightArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Check the guarantees for this run (exit 3 on violation).
    #[arg(long)]
    verify: bool,
    /// Write the final distribution (probability, state in hex) here.
    #[arg(long)]
    dump_dist: Option<PathBuf>,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct UsmArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Processing order, a comma-separated permutation of 0..n.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// LP solver for the per-element split.
    #[arg(long, default_value = "knapsack", value_parser = ["knapsack", "generic"])]
    solver: String,
    /// Keep duplicate states as separate tuples.
    #[arg(long)]
    no_unify: bool,
}

#[derive(Args)]
struct CardArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Cardinality bound.
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = ["usm", "card", "lp", "tight"])]
    suite: String,
    /// Cases per family.
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// Largest ground set for the algorithm suites.
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Use a deliberately broken LP solver.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated: usm, usm-generic, card, double-greedy, random-greedy.
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<String>,
    /// Glob of instance files.
    #[arg(long)]
    instances: String,
    /// Seed range `a..b` (half-open) or a single seed, for the randomized algorithms.
    #[arg(long, default_value = "0..1")]
    seeds: String,
    /// Comma-separated cardinality bounds for card and random-greedy.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the ms column (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TightArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = submax::tightcase::DEFAULT_ELL)]
    ell: f64,
    /// Write the per-iteration trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Usm(a) => commands::usm(a),
        Command::Card(a) => commands::card(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => bench::run(a),
        Command::Tight(a) => commands::tight(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
