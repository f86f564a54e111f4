//! Segment-level evaluation against relative rankings derived from DA.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Scores keyed by `(system, segment)`.
pub type SegmentScores = HashMap<(String, usize), f64>;

/// Human direct-assessment scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JudgmentTable {
    pub system_da: BTreeMap<String, f64>,
    pub segment_da: SegmentScores,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedPair {
    pub segment: usize,
    pub better: String,
    pub worse: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeRankingPairs {
    pub pairs: Vec<RankedPair>,
}

impl RelativeRankingPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Default DA gap (0–100 scale) for turning two judgments into a ranking.
pub const DEFAULT_MIN_GAP: f64 = 25.0;

/// One pair per segment and system pair whose DA scores differ by at least
/// `min_gap`, ordered by the higher score. Output is sorted by segment, then
/// by system names.
pub fn da_to_relative_ranking(segment_da: &SegmentScores, min_gap: f64) -> RelativeRankingPairs {
    let mut by_segment: BTreeMap<usize, Vec<(&str, f64)>> = BTreeMap::new();
    for ((sys, seg), &score) in segment_da {
        by_segment.entry(*seg).or_default().push((sys.as_str(), score));
    }
    let mut pairs = Vec::new();
    for (seg, mut judged) in by_segment {
        judged.sort_by(|a, b| a.0.cmp(b.0));
        for i in 0..judged.len() {
            for j in i + 1..judged.len() {
                let (a, sa) = judged[i];
                let (b, sb) = judged[j];
                let gap = (sa - sb).abs();
                if gap > 0.0 && gap >= min_gap {
                    let (better, worse) = if sa > sb { (a, b) } else { (b, a) };
                    pairs.push(RankedPair {
                        segment: seg,
                        better: better.to_string(),
                        worse: worse.to_string(),
                    });
                }
            }
        }
    }
    RelativeRankingPairs { pairs }
}

/// Treatment of pairs the metric scores equally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    #[default]
    Discordant,
    Excluded,
}

/// Per-pair verdict of a metric: `1` concordant, `-1` discordant, `0`
/// excluded tie.
pub fn pair_outcomes(pairs: &RelativeRankingPairs, scores: &SegmentScores, ties: TiePolicy) -> Result<Vec<i8>> {
    let lookup = |sys: &str, seg: usize| {
        scores
            .get(&(sys.to_string(), seg))
            .copied()
            .ok_or_else(|| Error::Missing(format!("metric score for system {sys}, segment {seg}")))
    };
    pairs
        .pairs
        .iter()
        .map(|p| {
            let b = lookup(&p.better, p.segment)?;
            let w = lookup(&p.worse, p.segment)?;
            Ok(if b > w {
                1
            } else if b == w && ties == TiePolicy::Excluded {
                0
            } else {
                -1
            })
        })
        .collect()
}

fn tau_from_outcomes(outcomes: &[i8]) -> f64 {
    let (sum, n) = outcomes.iter().fold((0i64, 0i64), |(s, n), &o| (s + i64::from(o), n + i64::from(o != 0)));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// `(concordant - discordant) / (concordant + discordant)`.
pub fn kendall_tau_rr(pairs: &RelativeRankingPairs, scores: &SegmentScores, ties: TiePolicy) -> Result<f64> {
    Ok(tau_from_outcomes(&pair_outcomes(pairs, scores, ties)?))
}

/// Bootstrap over pairs: the fraction of `iterations` resamples (drawn
/// with replacement) in which the candidate's tau is not above the
/// baseline's. Resample `i` uses a generator seeded with `seed + i`.
pub fn bootstrap_tau_significance(
    baseline: &SegmentScores,
    candidate: &SegmentScores,
    pairs: &RelativeRankingPairs,
    iterations: usize,
    seed: u64,
    ties: TiePolicy,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Degenerate("bootstrap over an empty pair set".into()));
    }
    if iterations < 100 {
        return Err(Error::config(format!("bootstrap needs at least 100 iterations, got {iterations}")));
    }
    let base = pair_outcomes(pairs, baseline, ties)?;
    let cand = pair_outcomes(pairs, candidate, ties)?;
    Ok(bootstrap_outcomes(&base, &cand, iterations, seed))
}

pub(crate) fn bootstrap_outcomes(base: &[i8], cand: &[i8], iterations: usize, seed: u64) -> f64 {
    let n = base.len();
    let not_better = par::map_range(iterations, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let (mut sb, mut nb, mut sc, mut nc) = (0i64, 0i64, 0i64, 0i64);
        for _ in 0..n {
            let k = rng.random_range(0..n);
            sb += i64::from(base[k]);
            nb += i64::from(base[k] != 0);
            sc += i64::from(cand[k]);
            nc += i64::from(cand[k] != 0);
        }
        // tau_c <= tau_b, compared exactly as fractions.
        match (nb, nc) {
            (0, 0) => true,
            (0, _) => sc <= 0,
            (_, 0) => sb >= 0,
            _ => (sc as i128) * (nb as i128) <= (sb as i128) * (nc as i128),
        }
    });
    not_better.iter().filter(|&&b| b).count() as f64 / iterations as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipAnalysis {
    pub improved: usize,
    pub degraded: usize,
    pub total: usize,
    pub improved_pct: f64,
    pub degraded_pct: f64,
}

/// Pairs whose decision the new metric fixes (baseline wrong, new right)
/// or breaks (the reverse), as percentages of all pairs. Metric ties count
/// as wrong.
pub fn decision_flip_analysis(
    baseline: &SegmentScores,
    new: &SegmentScores,
    pairs: &RelativeRankingPairs,
) -> Result<FlipAnalysis> {
    let base = pair_outcomes(pairs, baseline, TiePolicy::Discordant)?;
    let cand = pair_outcomes(pairs, new, TiePolicy::Discordant)?;
    let improved = base.iter().zip(&cand).filter(|(b, c)| **b < 0 && **c > 0).count();
    let degraded = base.iter().zip(&cand).filter(|(b, c)| **b > 0 && **c < 0).count();
    let total = base.len();
    let pct = |k: usize| if total == 0 { 0.0 } else { 100.0 * k as f64 / total as f64 };
    Ok(FlipAnalysis {
        improved,
        degraded,
        total,
        improved_pct: pct(improved),
        degraded_pct: pct(degraded),
    })
}
