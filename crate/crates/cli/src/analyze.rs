use std::path::PathBuf;

use clap::{Args, Subcommand};
use refcover::bleu::BleuConfig;
use refcover::io::{read_reference_sets, read_segment_scores, read_system_dir, read_system_scores};
use refcover::stats::{
    bleu_subset_curve, da_to_relative_ranking, decision_flip_analysis, ngram_coverage_analysis, NGramCount,
    DEFAULT_MIN_GAP,
};
use serde::Serialize;

use crate::config::{required, required_list, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_inputs, emit, emit_json, wants_json};

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Pairwise decisions a new metric fixes or breaks relative to a baseline.
    Flips(FlipsArgs),
    /// N-grams newly matched by extra references, and those never matched.
    Coverage(CoverageArgs),
    /// Correlation of corpus BLEU on random segment subsets of each size.
    Subsets(SubsetsArgs),
}

#[derive(Debug, Args)]
pub struct FlipsArgs {
    /// Segment-level human judgments, `system<TAB>segment<TAB>score`.
    #[arg(long, value_name = "FILE")]
    da: Option<PathBuf>,

    /// Baseline metric segment scores.
    #[arg(long, value_name = "FILE")]
    baseline: PathBuf,

    /// New metric segment scores.
    #[arg(long, value_name = "FILE")]
    candidate: PathBuf,

    #[arg(long)]
    min_gap: Option<f64>,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Original reference files.
    #[arg(long = "ref", value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    refs: Vec<PathBuf>,

    /// Additional (paraphrased) reference files.
    #[arg(long = "extra-ref", value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    extra_refs: Vec<PathBuf>,

    #[arg(long, value_name = "DIR")]
    systems: Option<PathBuf>,

    /// N-gram orders (default 1,2,3,4).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    orders: Vec<usize>,

    /// Keep the N most frequent entries per order and table (0 keeps all).
    #[arg(long)]
    top: Option<usize>,

    #[arg(long)]
    tokenized: bool,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubsetsArgs {
    #[arg(long = "ref", value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    refs: Vec<PathBuf>,

    #[arg(long, value_name = "DIR")]
    systems: Option<PathBuf>,

    /// System-level human scores, `system<TAB>score`.
    #[arg(long, value_name = "FILE")]
    da: Option<PathBuf>,

    /// Subset sizes in segments.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sizes: Vec<usize>,

    /// Random subsets per size.
    #[arg(long)]
    samples: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    max_order: Option<usize>,

    #[arg(long)]
    tokenized: bool,

    /// Output path; TSV unless it ends in .json.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CoverageReport {
    orders: Vec<usize>,
    segments: usize,
    newly_matched: Vec<NGramCount>,
    missing: Vec<NGramCount>,
}

fn keep_top(table: Vec<NGramCount>, top: usize) -> Vec<NGramCount> {
    if top == 0 {
        return table;
    }
    let mut seen = std::collections::BTreeMap::<usize, usize>::new();
    table
        .into_iter()
        .filter(|c| {
            let n = seen.entry(c.order).or_default();
            *n += 1;
            *n <= top
        })
        .collect()
}

fn flips(a: FlipsArgs, cfg: &RunConfig) -> CmdResult {
    let da = required(a.da, &cfg.paths.da_segment, "da")?;
    let min_gap = a.min_gap.or(cfg.analyze.min_gap).unwrap_or(DEFAULT_MIN_GAP);
    check_inputs([da.as_path(), a.baseline.as_path(), a.candidate.as_path()])?;
    let pairs = da_to_relative_ranking(&read_segment_scores(&da)?, min_gap);
    let result = decision_flip_analysis(&read_segment_scores(&a.baseline)?, &read_segment_scores(&a.candidate)?, &pairs)?;
    log::info!(
        "{} pairs: {:.1}% improved, {:.1}% degraded",
        result.total,
        result.improved_pct,
        result.degraded_pct
    );
    emit_json(a.out.as_deref(), &result)
}

fn coverage(a: CoverageArgs, cfg: &RunConfig) -> CmdResult {
    let refs = required_list(a.refs, &cfg.paths.refs, "ref")?;
    let extra = if a.extra_refs.is_empty() { cfg.paths.extra_refs.clone() } else { a.extra_refs };
    let systems = required(a.systems, &cfg.paths.systems, "systems")?;
    let orders = if a.orders.is_empty() {
        cfg.analyze.orders.clone().unwrap_or_else(|| vec![1, 2, 3, 4])
    } else {
        a.orders
    };
    if orders.is_empty() || orders.contains(&0) {
        return Err(Failure::usage("--orders must be positive integers"));
    }
    let top = a.top.or(cfg.analyze.top).unwrap_or(0);
    check_inputs(refs.iter().chain(&extra).chain([&systems]).map(PathBuf::as_path))?;

    let tokenized = cfg.tokenized(a.tokenized);
    let ref_sets = read_reference_sets(&refs, tokenized)?;
    let extra_sets = if extra.is_empty() { Vec::new() } else { read_reference_sets(&extra, tokenized)? };
    let outputs: Vec<_> = read_system_dir(&systems, tokenized)?.into_values().collect();
    let tables = ngram_coverage_analysis(&ref_sets, &extra_sets, &outputs, &orders)?;
    log::info!(
        "{} newly matched and {} missing n-gram types",
        tables.newly_matched.len(),
        tables.missing.len()
    );
    emit_json(
        a.out.as_deref(),
        &CoverageReport {
            orders,
            segments: ref_sets.len(),
            newly_matched: keep_top(tables.newly_matched, top),
            missing: keep_top(tables.missing, top),
        },
    )
}

fn subsets(a: SubsetsArgs, cfg: &RunConfig) -> CmdResult {
    let refs = required_list(a.refs, &cfg.paths.refs, "ref")?;
    let systems = required(a.systems, &cfg.paths.systems, "systems")?;
    let da = required(a.da, &cfg.paths.da_system, "da")?;
    let sizes = if a.sizes.is_empty() {
        cfg.analyze
            .sizes
            .clone()
            .ok_or_else(|| Failure::usage("missing --sizes (not given on the command line or in the config)"))?
    } else {
        a.sizes
    };
    let samples = a.samples.or(cfg.analyze.samples).unwrap_or(10);
    let config = BleuConfig::uniform(a.max_order.or(cfg.score.max_order).unwrap_or(4));
    config.validate()?;
    let seed = cfg.seed(a.seed);
    check_inputs(refs.iter().chain([&systems, &da]).map(PathBuf::as_path))?;

    let tokenized = cfg.tokenized(a.tokenized);
    let ref_sets = read_reference_sets(&refs, tokenized)?;
    let outputs = read_system_dir(&systems, tokenized)?;
    let human = read_system_scores(&da)?;
    let curve = bleu_subset_curve(&human, &outputs, &ref_sets, &config, &sizes, samples, seed)?;
    if wants_json(a.out.as_deref()) {
        return emit_json(a.out.as_deref(), &curve);
    }
    let mut text = String::from("size\tmean\tstd\tsamples\n");
    for p in &curve {
        text.push_str(&format!("{}\t{}\t{}\t{}\n", p.size, p.mean, p.std, p.samples.len()));
    }
    emit(a.out.as_deref(), &text)
}

pub fn run(cmd: AnalyzeCommand, cfg: &RunConfig) -> CmdResult {
    match cmd {
        AnalyzeCommand::Flips(a) => flips(a, cfg),
        AnalyzeCommand::Coverage(a) => coverage(a, cfg),
        AnalyzeCommand::Subsets(a) => subsets(a, cfg),
    }
}
