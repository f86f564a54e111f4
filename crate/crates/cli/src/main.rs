mod analyze;
mod cluster;
mod config;
mod correlate;
mod failure;
mod mine;
mod output;
mod score;
mod trees;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::failure::Failure;

/// Multi-reference MT evaluation: BLEU, paraphrase diversity, constraint
/// mining, cluster codes and metric meta-evaluation.
#[derive(Debug, Parser)]
#[command(name = "refcover", version, propagate_version = true)]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "REFCOVER_THREADS")]
    threads: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Only warnings and errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus or sentence BLEU against one or more references.
    Score(score::ScoreArgs),
    /// Lexical and syntactic diversity of paraphrase sets.
    Diversity(trees::DiversityArgs),
    /// Distinct pruned parse shapes per depth.
    TreeStats(trees::TreeStatsArgs),
    /// Mine unrewarded n-gram constraints from system outputs.
    Mine(mine::MineArgs),
    /// Sentence-code clustering over embedding matrices.
    #[command(subcommand)]
    Cluster(cluster::ClusterCommand),
    /// Correlate metric scores with human judgments.
    Correlate(correlate::CorrelateArgs),
    /// Decision flips, n-gram coverage and subset curves.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_millis()
        .target(env_logger::Target::Stderr)
        .init();
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let go = move || match cli.command {
        Command::Score(args) => score::run(args, &cfg),
        Command::Diversity(args) => trees::run_diversity(args, &cfg),
        Command::TreeStats(args) => trees::run_tree_stats(args, &cfg),
        Command::Mine(args) => mine::run(args, &cfg),
        Command::Cluster(cmd) => cluster::run(cmd, &cfg),
        Command::Correlate(args) => correlate::run(args, &cfg),
        Command::Analyze(cmd) => analyze::run(cmd, &cfg),
    };
    match threads {
        Some(n) => {
            log::debug!("using {n} worker threads");
            refcover::par::with_threads(n, go)
        }
        None => go(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.verbose, cli.quiet);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
