use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimictree::{Heuristic, PenaltyNorm};
use serde::Serialize;

mod bench;
mod explain;
mod output;
mod train;

#[derive(Parser)]
#[command(name = "mimictree", version, about = "Distil a black-box regression teacher into a linear model tree")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, label, grow, prune and evaluate a tree.
    Train(TrainArgs),
    /// Write importance, rules and a graph for a trained tree.
    Explain(ExplainArgs),
    /// Time tree growth per heuristic on synthetic data.
    Bench(BenchArgs),
}

#[derive(Args, Serialize, Debug)]
pub struct TrainArgs {
    /// Event table (CSV with a header row).
    #[arg(long)]
    pub data: PathBuf,
    /// Schema sidecar declaring features, target, episode and window.
    #[arg(long)]
    pub schema: PathBuf,
    /// Target column, overriding the schema.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value = "variance")]
    pub heuristic: Heuristic,
    /// Minimum records per leaf.
    #[arg(long, default_value_t = 100)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 8191)]
    pub max_nodes: usize,
    /// Pruning strength; 0 keeps every split that fits better.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value = "l0")]
    pub norm: PenaltyNorm,
    /// Teacher command speaking the line protocol on stdin/stdout.
    #[arg(long, conflicts_with = "labels_file")]
    pub oracle_cmd: Option<String>,
    /// One soft label per line, aligned with the data rows.
    #[arg(long)]
    pub labels_file: Option<PathBuf>,
    /// Action level to substitute into sampled training rows.
    #[arg(long, requires = "oracle_cmd")]
    pub augment_action: Option<String>,
    /// Augmented rows as a fraction of the training split.
    #[arg(long, default_value_t = 0.1)]
    pub augment_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Master seed; every random stage derives its own seed from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only the most important features.
    #[arg(long)]
    pub top: Option<usize>,
    /// Truncate the graph below this depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Only write rules for leaves with at least this many records.
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Merge lag columns of the same source column.
    #[arg(long)]
    pub aggregate: bool,
    /// Rescale importances to sum to 1.
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Row counts to time.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "variance,ttest,segmented,gmm")]
    pub heuristics: Vec<Heuristic>,
    #[arg(long, default_value_t = 100)]
    pub min_leaf: usize,
    /// Wall-clock budget per run.
    #[arg(long, default_value_t = 600.0)]
    pub budget_secs: f64,
    /// Exit non-zero when any run exceeds the budget.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Train(args) => train::run(args),
        Command::Explain(args) => explain::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
