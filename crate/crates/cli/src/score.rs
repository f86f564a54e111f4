use std::path::PathBuf;

use clap::Args;
use refcover::bleu::{corpus_bleu, sentence_bleu_all, BleuConfig, BleuScore, Smoothing};
use refcover::io::{read_reference_sets, read_segments};
use serde::Serialize;

use crate::config::{required, required_list, RunConfig};
use crate::failure::CmdResult;
use crate::output::{check_inputs, emit_json};

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Hypothesis file, one segment per line.
    #[arg(long, value_name = "FILE")]
    hyp: Option<PathBuf>,

    /// Line-aligned reference files (comma-separated or repeated).
    #[arg(long = "ref", value_name = "FILE", value_delimiter = ',', num_args = 1..)]
    refs: Vec<PathBuf>,

    /// Per-segment scores instead of one corpus score.
    #[arg(long)]
    sentence: bool,

    #[arg(long, value_name = "N")]
    max_order: Option<usize>,

    /// Smoothing: none or exp (default: exp for --sentence, none otherwise).
    #[arg(long, value_parser = parse_smoothing)]
    smooth: Option<Smoothing>,

    /// Inputs are already tokenized; split on whitespace only.
    #[arg(long)]
    tokenized: bool,

    /// Report path (default: standard output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn parse_smoothing(s: &str) -> Result<Smoothing, String> {
    match s {
        "none" | "floor0" => Ok(Smoothing::None),
        "exp" | "exponential" => Ok(Smoothing::Exponential),
        other => Err(format!("unknown smoothing {other:?} (expected none or exp)")),
    }
}

/// A [`BleuScore`] plus its ×100 presentation.
#[derive(Debug, Serialize)]
struct ScoreReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    segment: Option<usize>,
    bleu: f64,
    precisions_x100: Vec<f64>,
    #[serde(flatten)]
    raw: BleuScore,
}

impl ScoreReport {
    fn new(segment: Option<usize>, raw: BleuScore) -> Self {
        ScoreReport {
            segment,
            bleu: raw.score_x100(),
            precisions_x100: raw.precisions_x100(),
            raw,
        }
    }
}

pub fn run(args: ScoreArgs, cfg: &RunConfig) -> CmdResult {
    let hyp = required(args.hyp, &cfg.paths.hyp, "hyp")?;
    let refs = required_list(args.refs, &cfg.paths.refs, "ref")?;
    let sentence = args.sentence || cfg.score.sentence.unwrap_or(false);
    let smoothing = args.smooth.or(cfg.score.smooth).unwrap_or(if sentence {
        Smoothing::Exponential
    } else {
        Smoothing::None
    });
    let config = BleuConfig::uniform(args.max_order.or(cfg.score.max_order).unwrap_or(4)).with_smoothing(smoothing);
    config.validate()?;
    check_inputs(std::iter::once(hyp.as_path()).chain(refs.iter().map(PathBuf::as_path)))?;

    let tokenized = cfg.tokenized(args.tokenized);
    let hyps = read_segments(&hyp, tokenized)?;
    let ref_sets = read_reference_sets(&refs, tokenized)?;
    log::info!("scoring {} segments against {} reference(s)", hyps.len(), refs.len());
    if sentence {
        let scores = sentence_bleu_all(&hyps, &ref_sets, &config)?;
        let reports: Vec<ScoreReport> = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| ScoreReport::new(Some(i), s))
            .collect();
        emit_json(args.out.as_deref(), &reports)
    } else {
        let score = corpus_bleu(&hyps, &ref_sets, &config)?;
        log::info!("BLEU = {:.2}", score.score_x100());
        emit_json(args.out.as_deref(), &ScoreReport::new(None, score))
    }
}
