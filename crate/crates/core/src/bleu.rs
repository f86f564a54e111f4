//! Corpus- and sentence-level BLEU with any number of references.
//!
//! Sufficient statistics ([`BleuStats`]) are integer counts, so per-segment
//! statistics can be computed in parallel and summed in any order with an
//! identical result.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::text::{count_ngrams, max_ref_counts, Segment};

/// Log value the reference scorer uses for zero precisions.
const LOG_ZERO: f64 = -9_999_999_999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    None,
    #[serde(alias = "exp")]
    Exponential,
}

/// How the reference length `r` is chosen when a segment has several
/// references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefLengthPolicy {
    /// Length closest to the hypothesis length; ties go to the shorter one.
    Closest,
    Shortest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub weights: Vec<f64>,
    pub smoothing: Smoothing,
    pub ref_length_policy: RefLengthPolicy,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig::uniform(4)
    }
}

impl BleuConfig {
    /// Uniform weights `1/max_order`, no smoothing, closest reference length.
    pub fn uniform(max_order: usize) -> Self {
        let n = max_order.max(1);
        BleuConfig {
            max_order: n,
            weights: vec![1.0 / n as f64; n],
            smoothing: Smoothing::None,
            ref_length_policy: RefLengthPolicy::Closest,
        }
    }

    /// The configuration used for segment-level scoring: exponential smoothing.
    pub fn sentence() -> Self {
        BleuConfig {
            smoothing: Smoothing::Exponential,
            ..BleuConfig::default()
        }
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::config("max_order must be at least 1"));
        }
        if self.weights.len() != self.max_order {
            return Err(Error::config(format!(
                "{} weights given for max_order {}",
                self.weights.len(),
                self.max_order
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config("weights must be finite and nonnegative"));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// BLEU result. `score` and `precisions` are fractions in `[0, 1]`; use
/// [`BleuScore::score_x100`] for the conventional scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    pub bp: f64,
    pub precisions: Vec<f64>,
    pub hyp_len: u64,
    pub ref_len: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl BleuScore {
    pub fn score_x100(&self) -> f64 {
        self.score * 100.0
    }

    pub fn precisions_x100(&self) -> Vec<f64> {
        self.precisions.iter().map(|p| p * 100.0).collect()
    }
}

/// Additive sufficient statistics of BLEU.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn zero(max_order: usize) -> Self {
        BleuStats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            hyp_len: 0,
            ref_len: 0,
        }
    }
}

impl AddAssign<&BleuStats> for BleuStats {
    fn add_assign(&mut self, rhs: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&rhs.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&rhs.totals) {
            *a += b;
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

/// `1` if `c > r`, else `e^(1 - r/c)`.
pub fn brevity_penalty(c: u64, r: u64) -> Result<f64> {
    if c == 0 {
        return Err(Error::EmptyHypothesis);
    }
    Ok(bp_unchecked(c, r))
}

fn bp_unchecked(c: u64, r: u64) -> f64 {
    if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

pub fn effective_ref_length(hyp_len: usize, ref_lens: &[usize], policy: RefLengthPolicy) -> Result<usize> {
    let first = *ref_lens.first().ok_or(Error::NoReference)?;
    Ok(match policy {
        RefLengthPolicy::Shortest => ref_lens.iter().copied().min().unwrap_or(first),
        RefLengthPolicy::Closest => ref_lens
            .iter()
            .copied()
            .min_by_key(|&len| (len.abs_diff(hyp_len), len))
            .unwrap_or(first),
    })
}

/// Statistics of one hypothesis against its reference set.
pub fn segment_stats(hyp: &Segment, refs: &[Segment], config: &BleuConfig) -> Result<BleuStats> {
    if refs.is_empty() {
        return Err(Error::NoReference);
    }
    let n = config.max_order;
    let ref_counts = max_ref_counts(refs, n);
    let ref_lens: Vec<usize> = refs.iter().map(Segment::len).collect();
    let mut stats = BleuStats::zero(n);
    stats.hyp_len = hyp.len() as u64;
    stats.ref_len = effective_ref_length(hyp.len(), &ref_lens, config.ref_length_policy)? as u64;
    for (g, c) in count_ngrams(hyp.tokens(), n) {
        let k = g.len() - 1;
        stats.totals[k] += u64::from(c);
        stats.matches[k] += u64::from(c.min(ref_counts.get(g).copied().unwrap_or(0)));
    }
    Ok(stats)
}

/// Per-segment statistics for a whole corpus (possibly in parallel).
pub fn corpus_stats(hyps: &[Segment], refs: &[Vec<Segment>], config: &BleuConfig) -> Result<Vec<BleuStats>> {
    config.validate()?;
    if hyps.len() != refs.len() {
        return Err(Error::mismatch("reference sets", hyps.len(), refs.len()));
    }
    par::try_map_range(hyps.len(), |i| segment_stats(&hyps[i], &refs[i], config))
}

/// Computes the score from accumulated statistics.
///
/// With `effective_order`, orders whose denominator is zero are dropped and
/// the remaining weights renormalized (sentence-level behaviour).
pub fn score_from_stats(stats: &BleuStats, config: &BleuConfig, effective_order: bool) -> BleuScore {
    let n = config.max_order;
    let mut precisions = vec![0.0; n];
    let mut smooth = 1.0;
    let mut used = n;
    for k in 0..n {
        if stats.totals[k] == 0 {
            if effective_order {
                used = k;
            }
            break;
        }
        let total = stats.totals[k] as f64;
        precisions[k] = if stats.matches[k] == 0 {
            match config.smoothing {
                Smoothing::Exponential => {
                    smooth *= 2.0;
                    1.0 / (smooth * total)
                }
                Smoothing::None => 0.0,
            }
        } else {
            stats.matches[k] as f64 / total
        };
    }
    let bp = bp_unchecked(stats.hyp_len, stats.ref_len);
    let mut warning = None;
    let score = if stats.hyp_len == 0 {
        warning = Some("empty hypothesis".to_string());
        0.0
    } else if used == 0 {
        0.0
    } else {
        let wsum: f64 = config.weights[..used].iter().sum();
        let log_sum: f64 = precisions[..used]
            .iter()
            .zip(&config.weights[..used])
            .map(|(&p, &w)| {
                let lp = if p > 0.0 { (100.0 * p).ln() } else { LOG_ZERO };
                w / wsum * lp
            })
            .sum();
        let s = bp * log_sum.exp() / 100.0;
        if precisions[..used].contains(&0.0) {
            0.0
        } else {
            s.clamp(0.0, 1.0)
        }
    };
    BleuScore {
        score,
        bp,
        precisions,
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
        warning,
    }
}

/// Sums segment statistics in index order.
pub fn sum_stats(per_segment: &[BleuStats], max_order: usize) -> BleuStats {
    let mut total = BleuStats::zero(max_order);
    for s in per_segment {
        total += s;
    }
    total
}

/// Corpus BLEU: n-gram matches and totals are accumulated over all segments
/// before dividing. `refs[i]` holds every reference of segment `i`.
pub fn corpus_bleu(hyps: &[Segment], refs: &[Vec<Segment>], config: &BleuConfig) -> Result<BleuScore> {
    if hyps.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    let per_segment = corpus_stats(hyps, refs, config)?;
    let total = sum_stats(&per_segment, config.max_order);
    if total.hyp_len == 0 {
        return Err(Error::EmptyHypothesis);
    }
    Ok(score_from_stats(&total, config, false))
}

/// Sentence BLEU with per-order effective order; use a config with
/// exponential smoothing ([`BleuConfig::sentence`]) for the usual variant.
pub fn sentence_bleu(hyp: &Segment, refs: &[Segment], config: &BleuConfig) -> Result<BleuScore> {
    config.validate()?;
    let stats = segment_stats(hyp, refs, config)?;
    let score = score_from_stats(&stats, config, true);
    if score.warning.is_some() {
        log::warn!("sentence BLEU of an empty hypothesis is 0");
    }
    Ok(score)
}

/// Sentence BLEU for every segment of a corpus.
pub fn sentence_bleu_all(hyps: &[Segment], refs: &[Vec<Segment>], config: &BleuConfig) -> Result<Vec<BleuScore>> {
    corpus_stats(hyps, refs, config).map(|stats| {
        par::map_slice(&stats, |s| score_from_stats(s, config, true))
    })
}
