//! Declarative run configuration.
//!
//! A single TOML file can carry shared input paths, a seed, a thread count
//! and one parameter table per command. Relative paths are resolved against
//! the directory holding the file. Every value can be overridden on the
//! command line.
//!
//! ```toml
//! threads = 8
//! seed = 13
//! tokenized = false
//!
//! [paths]
//! refs = ["newstest2019.ref"]
//! extra_refs = ["para1.txt", "para2.txt"]
//! systems = "outputs/"
//! system_scores = "da_sys.tsv"
//! da_system = "da_sys.tsv"
//! da_segment = "da_seg.tsv"
//!
//! [score]
//! max_order = 4
//! smooth = "exp"
//!
//! [mine]
//! orders = [2, 3, 4]
//! threshold = 0.75
//!
//! [correlate]
//! min_gap = 25.0
//! bootstrap = 1000
//! tables = ["tsv", "md"]
//! ```

use std::path::{Path, PathBuf};

use refcover::bleu::Smoothing;
use refcover::report::TableFormat;
use refcover::stats::{Tail, TiePolicy};
use refcover::trees::Depth;
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    /// Inputs are already tokenized (whitespace-split only).
    pub tokenized: Option<bool>,
    pub paths: Paths,
    pub score: ScoreSection,
    pub diversity: DiversitySection,
    pub tree_stats: TreeStatsSection,
    pub mine: MineSection,
    pub cluster: ClusterSection,
    pub correlate: CorrelateSection,
    pub analyze: AnalyzeSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub hyp: Option<PathBuf>,
    pub refs: Vec<PathBuf>,
    pub extra_refs: Vec<PathBuf>,
    pub systems: Option<PathBuf>,
    pub system_scores: Option<PathBuf>,
    pub da_system: Option<PathBuf>,
    pub da_segment: Option<PathBuf>,
    pub metric_scores: Option<PathBuf>,
    pub paraphrases: Vec<PathBuf>,
    pub parses: Vec<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    pub sentence: Option<bool>,
    pub max_order: Option<usize>,
    pub smooth: Option<Smoothing>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversitySection {
    pub lambda: Option<f64>,
    pub sigma: Option<u8>,
    pub include_leaves: Option<bool>,
    pub ragged: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeStatsSection {
    pub depths: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineSection {
    pub orders: Option<Vec<usize>>,
    pub threshold: Option<f64>,
    pub joint: Option<bool>,
    pub splits: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub k: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateSection {
    pub lp: Option<String>,
    pub baseline: Option<String>,
    pub min_gap: Option<f64>,
    pub bootstrap: Option<usize>,
    pub ties: Option<TiePolicy>,
    pub tail: Option<Tail>,
    pub tables: Option<Vec<TableFormat>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub orders: Option<Vec<usize>>,
    pub top: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub min_gap: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve(base);
        Ok(cfg)
    }

    pub fn tokenized(&self, flag: bool) -> bool {
        flag || self.tokenized.unwrap_or(false)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(0)
    }

    pub fn depths(&self) -> Result<Option<Vec<Depth>>, Failure> {
        self.tree_stats
            .depths
            .as_ref()
            .map(|ds| ds.iter().map(|d| d.parse().map_err(Failure::from)).collect())
            .transpose()
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.hyp,
            &mut self.systems,
            &mut self.system_scores,
            &mut self.da_system,
            &mut self.da_segment,
            &mut self.metric_scores,
            &mut self.embeddings,
            &mut self.model,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        for list in [&mut self.refs, &mut self.extra_refs, &mut self.paraphrases, &mut self.parses] {
            list.iter_mut().for_each(fix);
        }
    }
}

/// Flag value, else config value, else a usage error naming the flag.
pub fn required<T: Clone>(flag: Option<T>, cfg: &Option<T>, name: &str) -> Result<T, Failure> {
    flag.or_else(|| cfg.clone())
        .ok_or_else(|| Failure::usage(format!("missing --{name} (not given on the command line or in the config)")))
}

/// Non-empty flag list, else the config list, else a usage error.
pub fn required_list(flag: Vec<PathBuf>, cfg: &[PathBuf], name: &str) -> Result<Vec<PathBuf>, Failure> {
    let list = if flag.is_empty() { cfg.to_vec() } else { flag };
    if list.is_empty() {
        return Err(Failure::usage(format!(
            "missing --{name} (not given on the command line or in the config)"
        )));
    }
    Ok(list)
}
