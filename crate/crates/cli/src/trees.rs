use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use refcover::diversity::{corpus_diversity, DiversityOptions, ParaphraseSet};
use refcover::io::{read_parses, read_reference_sets};
use refcover::trees::{distinct_tree_stats, Depth, KernelConfig};

use crate::config::{required_list, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_inputs, emit, emit_json, wants_json};

#[derive(Debug, Args)]
pub struct DiversityArgs {
    /// Paraphrase files; line j of file i is paraphrase i of segment j.
    #[arg(long, value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    paraphrases: Vec<PathBuf>,

    /// Parse files aligned with the paraphrase files; enables DS_tree.
    #[arg(long, value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    parses: Vec<PathBuf>,

    /// Kernel decay factor.
    #[arg(long)]
    lambda: Option<f64>,

    /// 0 matches complete subtrees only, 1 all subset trees.
    #[arg(long)]
    sigma: Option<u8>,

    /// Let lexical leaves take part in tree matching.
    #[arg(long)]
    include_leaves: bool,

    /// Skip blank paraphrase lines, allowing sets of different sizes.
    #[arg(long)]
    ragged: bool,

    #[arg(long)]
    tokenized: bool,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn run_diversity(args: DiversityArgs, cfg: &RunConfig) -> CmdResult {
    let files = required_list(args.paraphrases, &cfg.paths.paraphrases, "paraphrases")?;
    let parse_files = if args.parses.is_empty() { cfg.paths.parses.clone() } else { args.parses };
    let sec = &cfg.diversity;
    let ragged = args.ragged || sec.ragged.unwrap_or(false);
    if !parse_files.is_empty() && parse_files.len() != files.len() {
        return Err(Failure::usage(format!(
            "{} parse files for {} paraphrase files",
            parse_files.len(),
            files.len()
        )));
    }
    if ragged && !parse_files.is_empty() {
        return Err(Failure::usage("--ragged cannot be combined with --parses"));
    }
    let kernel = KernelConfig {
        lambda: args.lambda.or(sec.lambda).unwrap_or(0.5),
        sigma: args.sigma.or(sec.sigma).unwrap_or(0),
        include_leaves: args.include_leaves || sec.include_leaves.unwrap_or(false),
    };
    kernel.validate()?;
    check_inputs(files.iter().chain(&parse_files).map(PathBuf::as_path))?;

    let items = read_reference_sets(&files, cfg.tokenized(args.tokenized))?;
    let mut parses: Vec<Vec<_>> = (0..items.len()).map(|_| Vec::new()).collect();
    for p in &parse_files {
        let trees = read_parses(p)?;
        if trees.len() != items.len() {
            return Err(Failure::Data(anyhow!(
                "{}: {} parses, expected {}",
                p.display(),
                trees.len(),
                items.len()
            )));
        }
        for (slot, t) in parses.iter_mut().zip(trees) {
            slot.push(t);
        }
    }
    let with_trees = !parse_files.is_empty();
    let sets: Vec<ParaphraseSet> = items
        .into_iter()
        .zip(parses)
        .enumerate()
        .map(|(i, (mut items, parses))| {
            if ragged {
                items.retain(|s| !s.is_empty());
            }
            ParaphraseSet {
                segment_id: i,
                items,
                parses: with_trees.then_some(parses),
            }
        })
        .collect();
    let opts = DiversityOptions {
        kernel,
        with_trees,
        ragged,
    };
    let report = corpus_diversity(&sets, &opts)?;
    log::info!("DS_bow = {:.4} over {} segments", report.ds_bow, report.segments);
    if let Some(t) = report.ds_tree {
        log::info!("DS_tree = {t:.4}");
    }
    emit_json(args.out.as_deref(), &report)
}

#[derive(Debug, Args)]
pub struct TreeStatsArgs {
    /// Bracketed parses, one tree per line (repeatable).
    #[arg(long, value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    parses: Vec<PathBuf>,

    /// Pruning depths; the root has depth 1 and "inf" keeps whole trees.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    depths: Vec<Depth>,

    /// Output path; TSV unless it ends in .json.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn run_tree_stats(args: TreeStatsArgs, cfg: &RunConfig) -> CmdResult {
    let files = required_list(args.parses, &cfg.paths.parses, "parses")?;
    let depths = if args.depths.is_empty() {
        cfg.depths()?.unwrap_or_else(|| (1..=5).map(|d| Depth(Some(d))).collect())
    } else {
        args.depths
    };
    check_inputs(files.iter().map(PathBuf::as_path))?;
    let mut trees = Vec::new();
    for f in &files {
        trees.extend(read_parses(f)?);
    }
    log::info!("read {} trees", trees.len());
    let stats = distinct_tree_stats(trees, &depths);
    if wants_json(args.out.as_deref()) {
        return emit_json(args.out.as_deref(), &stats);
    }
    let mut text = String::from("depth\tdistinct\tdistinct_with_leaves\ttype_token_ratio\n");
    for s in &stats {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            s.depth, s.count_no_leaves, s.count_with_leaves, s.type_token_ratio
        ));
    }
    emit(args.out.as_deref(), &text)
}
