use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use refcover::io::{read_segment_scores, read_system_scores};
use refcover::report::{emit_report_tables, CorrelationReport, Level, MetricResult, TableFormat};
use refcover::stats::{
    bootstrap_tau_significance, da_to_relative_ranking, decision_flip_analysis, kendall_tau_rr, pearson,
    williams_test, SegmentScores, Tail, TiePolicy, DEFAULT_MIN_GAP,
};

use crate::config::{required, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_inputs, emit, emit_json, sibling};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LevelArg {
    System,
    Segment,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TiesArg {
    Discordant,
    Excluded,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long, value_enum)]
    level: LevelArg,

    /// Directory of `<method>.tsv` metric score files, or of one such
    /// directory per language pair.
    #[arg(long, value_name = "DIR")]
    metric_scores: Option<PathBuf>,

    /// Human judgments: a TSV file, or a directory of `<lp>.tsv` files when
    /// the metric scores are split by language pair.
    #[arg(long, value_name = "PATH")]
    da: Option<PathBuf>,

    /// Method the others are tested against.
    #[arg(long)]
    baseline: Option<String>,

    /// Language-pair label for a single-pair run (default: the metric
    /// directory name).
    #[arg(long)]
    lp: Option<String>,

    /// Minimum DA difference for a segment-level pair.
    #[arg(long)]
    min_gap: Option<f64>,

    /// Bootstrap resamples for segment-level significance.
    #[arg(long)]
    bootstrap: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, value_enum)]
    ties: Option<TiesArg>,

    /// Two-sided Williams test instead of one-sided.
    #[arg(long)]
    two_sided: bool,

    /// Table formats written next to the report (tsv, md, json).
    #[arg(long = "table", value_delimiter = ',', num_args = 1..)]
    tables: Vec<TableFormat>,

    /// JSON report; tables go to the same stem with their own extension.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct Settings {
    level: Level,
    baseline: Option<String>,
    min_gap: f64,
    iterations: usize,
    seed: u64,
    ties: TiePolicy,
    tail: Tail,
}

/// `<stem> -> path` for every non-hidden regular file in `dir`.
fn method_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("{}", dir.display()))? {
        let path = entry.with_context(|| format!("{}", dir.display()))?.path();
        let Some(stem) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            continue;
        };
        if path.is_file() && !stem.starts_with('.') && out.insert(stem.clone(), path).is_some() {
            return Err(Failure::Data(anyhow!("{}: two score files for method {stem}", dir.display())));
        }
    }
    if out.is_empty() {
        return Err(Failure::Data(anyhow!("{}: no metric score files", dir.display())));
    }
    Ok(out)
}

fn subdirs(dir: &Path) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("{}", dir.display()))? {
        let path = entry.with_context(|| format!("{}", dir.display()))?.path();
        if path.is_dir() {
            out.insert(path.file_name().unwrap_or_default().to_string_lossy().into_owned(), path);
        }
    }
    Ok(out)
}

fn aligned(human: &BTreeMap<String, f64>, metric: &BTreeMap<String, f64>, method: &str) -> anyhow::Result<Vec<f64>> {
    human
        .keys()
        .map(|sys| {
            metric
                .get(sys)
                .copied()
                .ok_or_else(|| anyhow!("method {method} has no score for system {sys}"))
        })
        .collect()
}

fn system_level(lp: &str, da: &Path, methods: &BTreeMap<String, PathBuf>, s: &Settings) -> Result<Vec<MetricResult>, Failure> {
    let human = read_system_scores(da)?;
    let h: Vec<f64> = human.values().copied().collect();
    let mut scores = BTreeMap::new();
    for (m, path) in methods {
        let metric = read_system_scores(path)?;
        scores.insert(m.clone(), aligned(&human, &metric, m).with_context(|| path.display().to_string())?);
    }
    let base = s.baseline.as_ref().map(|b| &scores[b]);
    let mut results = Vec::new();
    for (m, xs) in &scores {
        let mut r = MetricResult::new(m.clone(), lp);
        let r12 = pearson(&h, xs)?;
        r.pearson = Some(r12);
        if let (Some(b), Some(bname)) = (base, &s.baseline) {
            if m != bname {
                let test = pearson(&h, b).and_then(|r13| Ok((r13, pearson(xs, b)?))).and_then(|(r13, r23)| {
                    williams_test(r12, r13, r23, h.len(), s.tail)
                });
                match test {
                    Ok(w) => {
                        r.williams_t = Some(w.t);
                        r.williams_p = Some(w.p);
                    }
                    Err(e) => log::warn!("{lp}/{m}: no Williams test: {e}"),
                }
            }
        }
        log::info!("{lp}/{m}: r = {r12:.4}");
        results.push(r);
    }
    Ok(results)
}

fn segment_level(lp: &str, da: &Path, methods: &BTreeMap<String, PathBuf>, s: &Settings) -> Result<Vec<MetricResult>, Failure> {
    let pairs = da_to_relative_ranking(&read_segment_scores(da)?, s.min_gap);
    log::info!("{lp}: {} relative-ranking pairs", pairs.len());
    let mut scores: BTreeMap<String, SegmentScores> = BTreeMap::new();
    for (m, path) in methods {
        scores.insert(m.clone(), read_segment_scores(path)?);
    }
    let base = s.baseline.as_ref().map(|b| &scores[b]);
    let mut results = Vec::new();
    for (m, metric) in &scores {
        let mut r = MetricResult::new(m.clone(), lp);
        let tau = kendall_tau_rr(&pairs, metric, s.ties).with_context(|| format!("{lp}/{m}"))?;
        r.tau = Some(tau);
        r.pairs = Some(pairs.len());
        if let (Some(b), Some(bname)) = (base, &s.baseline) {
            if m != bname {
                r.bootstrap_p = Some(bootstrap_tau_significance(b, metric, &pairs, s.iterations, s.seed, s.ties)?);
                r.flips = Some(decision_flip_analysis(b, metric, &pairs)?);
            }
        }
        log::info!("{lp}/{m}: tau = {tau:.4}");
        results.push(r);
    }
    Ok(results)
}

pub fn run(args: CorrelateArgs, cfg: &RunConfig) -> CmdResult {
    let sec = &cfg.correlate;
    let level = match args.level {
        LevelArg::System => Level::System,
        LevelArg::Segment => Level::Segment,
    };
    let da_default = match level {
        Level::System => &cfg.paths.da_system,
        Level::Segment => &cfg.paths.da_segment,
    };
    let da = required(args.da, da_default, "da")?;
    let metric_dir = required(args.metric_scores, &cfg.paths.metric_scores, "metric-scores")?;
    let settings = Settings {
        level,
        baseline: args.baseline.or_else(|| sec.baseline.clone()),
        min_gap: args.min_gap.or(sec.min_gap).unwrap_or(DEFAULT_MIN_GAP),
        iterations: args.bootstrap.or(sec.bootstrap).unwrap_or(1000),
        seed: cfg.seed(args.seed),
        ties: match args.ties {
            Some(TiesArg::Discordant) => TiePolicy::Discordant,
            Some(TiesArg::Excluded) => TiePolicy::Excluded,
            None => sec.ties.unwrap_or_default(),
        },
        tail: if args.two_sided { Tail::Two } else { sec.tail.unwrap_or_default() },
    };
    if !(settings.min_gap >= 0.0 && settings.min_gap.is_finite()) {
        return Err(Failure::usage(format!("--min-gap {} must be a non-negative number", settings.min_gap)));
    }
    if level == Level::Segment && settings.baseline.is_some() && settings.iterations < 100 {
        return Err(Failure::usage("--bootstrap needs at least 100 iterations"));
    }
    let tables = if args.tables.is_empty() {
        sec.tables.clone().unwrap_or_else(|| vec![TableFormat::Tsv])
    } else {
        args.tables
    };
    check_inputs([da.as_path(), metric_dir.as_path()])?;

    let lps = subdirs(&metric_dir)?;
    let jobs: Vec<(String, PathBuf, PathBuf)> = if lps.is_empty() {
        let lp = args.lp.or_else(|| sec.lp.clone()).unwrap_or_else(|| {
            metric_dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "all".into())
        });
        vec![(lp, da.clone(), metric_dir.clone())]
    } else {
        if !da.is_dir() {
            return Err(Failure::Data(anyhow!(
                "{}: metric scores are split by language pair, so --da must be a directory of <lp>.tsv files",
                da.display()
            )));
        }
        lps.into_iter()
            .map(|(lp, dir)| (lp.clone(), da.join(format!("{lp}.tsv")), dir))
            .collect()
    };

    let mut results = Vec::new();
    for (lp, da_file, dir) in &jobs {
        check_inputs([da_file.as_path()])?;
        let methods = method_files(dir)?;
        if let Some(b) = &settings.baseline {
            if !methods.contains_key(b) {
                return Err(Failure::usage(format!(
                    "baseline {b:?} is not among the methods of {lp} ({})",
                    methods.keys().cloned().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        results.extend(match level {
            Level::System => system_level(lp, da_file, &methods, &settings)?,
            Level::Segment => segment_level(lp, da_file, &methods, &settings)?,
        });
    }
    let report = CorrelationReport {
        level: settings.level,
        baseline: settings.baseline,
        results,
    };
    report.validate()?;
    emit_json(args.out.as_deref(), &report)?;
    match &args.out {
        Some(out) => {
            for f in tables.into_iter().filter(|f| *f != TableFormat::Json) {
                emit(Some(&sibling(out, "", Some(f.extension()))), &emit_report_tables(&report, f)?)?;
            }
        }
        None => log::debug!("no --out given; tables not written"),
    }
    Ok(())
}
