use std::path::{Path, PathBuf};

use clap::Args;
use refcover::io::{read_reference_sets, read_system_dir, read_system_scores};
use refcover::mining::{emit_constraints, split_protocol, ConstraintSet, MiningConfig, SystemOutputs};
use serde::Serialize;

use crate::config::{required, required_list, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_inputs, emit, emit_json, sibling};

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Reference files, line-aligned with the system outputs.
    #[arg(long = "refs", alias = "ref", value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    refs: Vec<PathBuf>,

    /// Directory of <system>.txt output files.
    #[arg(long, value_name = "DIR")]
    systems: Option<PathBuf>,

    /// Human system scores, `system<TAB>score`.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,

    /// N-gram orders to mine (default 2,3,4).
    #[arg(long = "order", alias = "orders", value_delimiter = ',', num_args = 1..)]
    orders: Vec<usize>,

    /// Fraction of voting systems an n-gram must appear in.
    #[arg(long)]
    threshold: Option<f64>,

    /// Mine all orders into one constraint set instead of one per order.
    #[arg(long)]
    joint: bool,

    /// Repeat over this many random system bisections, mining each half.
    #[arg(long)]
    splits: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    tokenized: bool,

    /// Constraint file (JSON lines). With several sets, the order and split
    /// are appended to the file stem.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SplitManifest {
    split: usize,
    seed: u64,
    mining: Vec<String>,
    evaluation: Vec<String>,
    files: Vec<PathBuf>,
}

fn set_suffix(set: &ConstraintSet) -> String {
    let orders: Vec<String> = set.orders.iter().map(|n| n.to_string()).collect();
    format!(".{}gram", orders.join("-"))
}

fn write_sets(out: Option<&Path>, sets: &[ConstraintSet], prefix: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut written = Vec::new();
    for set in sets {
        log::info!(
            "{}-gram set: {} constraints over {} segments",
            set.orders.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("+"),
            set.total_constraints(),
            set.records.len()
        );
        match out {
            Some(path) if sets.len() > 1 || !prefix.is_empty() => {
                let target = sibling(path, &format!("{prefix}{}", set_suffix(set)), None);
                emit(Some(&target), &set.to_jsonl())?;
                written.push(target);
            }
            Some(path) => {
                emit(Some(path), &set.to_jsonl())?;
                written.push(path.to_path_buf());
            }
            None => emit(None, &set.to_jsonl())?,
        }
    }
    Ok(written)
}

pub fn run(args: MineArgs, cfg: &RunConfig) -> CmdResult {
    let refs = required_list(args.refs, &cfg.paths.refs, "refs")?;
    let systems_dir = required(args.systems, &cfg.paths.systems, "systems")?;
    let scores = required(args.scores, &cfg.paths.system_scores, "scores")?;
    let sec = &cfg.mine;
    let config = MiningConfig {
        orders: if args.orders.is_empty() {
            sec.orders.clone().unwrap_or_else(|| vec![2, 3, 4])
        } else {
            args.orders
        },
        threshold: args.threshold.or(sec.threshold).unwrap_or(0.75),
        separate_orders: !(args.joint || sec.joint.unwrap_or(false)),
    };
    config.validate()?;
    let splits = args.splits.or(sec.splits);
    if splits == Some(0) {
        return Err(Failure::usage("--splits must be at least 1"));
    }
    check_inputs(
        refs.iter()
            .map(PathBuf::as_path)
            .chain([systems_dir.as_path(), scores.as_path()]),
    )?;

    let tokenized = cfg.tokenized(args.tokenized);
    let ref_sets = read_reference_sets(&refs, tokenized)?;
    let outputs = SystemOutputs::new(read_system_dir(&systems_dir, tokenized)?)?.with_scores(read_system_scores(&scores)?);
    log::info!("{} systems, {} segments", outputs.systems.len(), ref_sets.len());

    let Some(repeats) = splits else {
        let sets = emit_constraints(&ref_sets, &outputs, &config)?;
        write_sets(args.out.as_deref(), &sets, "")?;
        return Ok(());
    };
    let seed = cfg.seed(args.seed);
    let mut manifest = Vec::with_capacity(repeats);
    for (i, split) in split_protocol(&outputs.names(), repeats, seed)?.into_iter().enumerate() {
        log::info!("split {i}: mining on {}", split.mining.join(", "));
        let sets = emit_constraints(&ref_sets, &outputs.subset(&split.mining)?, &config)?;
        let files = write_sets(args.out.as_deref(), &sets, &format!(".split{i}"))?;
        manifest.push(SplitManifest {
            split: i,
            seed: seed.wrapping_add(i as u64),
            mining: split.mining,
            evaluation: split.evaluation,
            files,
        });
    }
    let manifest_path = args.out.as_deref().map(|p| sibling(p, ".splits", Some("json")));
    match manifest_path {
        Some(p) => emit_json(Some(&p), &manifest),
        None => Ok(()),
    }
}
