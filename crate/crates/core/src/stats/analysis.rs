//! Corpus analyses: n-gram coverage of extra references and correlation as a
//! function of test-set size.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bleu::{corpus_stats, score_from_stats, sum_stats, BleuConfig, BleuStats};
use crate::error::{Error, Result};
use crate::par;
use crate::stats::correlation::pearson;
use crate::text::Segment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramCount {
    pub ngram: String,
    pub order: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTables {
    /// Absent from the original references, present in an extra one.
    pub newly_matched: Vec<NGramCount>,
    /// Absent from every reference.
    pub missing: Vec<NGramCount>,
}

fn ngram_set<'a>(seg: &'a Segment, orders: &[usize], out: &mut HashSet<&'a [String]>) {
    let toks = seg.tokens();
    for &n in orders {
        if n == 0 || n > toks.len() {
            continue;
        }
        out.extend(toks.windows(n));
    }
}

fn check_aligned(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::mismatch(what, expected, got))
    }
}

fn into_table(counts: HashMap<&[String], usize>) -> Vec<NGramCount> {
    let mut rows: Vec<NGramCount> = counts
        .into_iter()
        .map(|(g, count)| NGramCount {
            ngram: g.join(" "),
            order: g.len(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.ngram.cmp(&b.ngram)));
    rows
}

/// For each segment, the union of n-grams over all system outputs is split
/// into those newly matched by `extra_refs` and those matched by no
/// reference at all. Counts are numbers of segments.
///
/// `refs[i]` and `extra_refs[i]` hold the references of segment `i`;
/// `systems[s][i]` is system `s`'s output for it.
pub fn ngram_coverage_analysis(
    refs: &[Vec<Segment>],
    extra_refs: &[Vec<Segment>],
    systems: &[Vec<Segment>],
    orders: &[usize],
) -> Result<CoverageTables> {
    let n = refs.len();
    if !extra_refs.is_empty() {
        check_aligned("extra reference segments", n, extra_refs.len())?;
    }
    for (s, out) in systems.iter().enumerate() {
        check_aligned(&format!("segments of system {s}"), n, out.len())?;
    }
    if orders.contains(&0) {
        return Err(Error::config("n-gram orders must be positive"));
    }

    let per_segment = par::map_range(n, |i| {
        let mut hyp = HashSet::new();
        for out in systems {
            ngram_set(&out[i], orders, &mut hyp);
        }
        let mut orig = HashSet::new();
        for r in &refs[i] {
            ngram_set(r, orders, &mut orig);
        }
        let mut extra = HashSet::new();
        if let Some(er) = extra_refs.get(i) {
            for r in er {
                ngram_set(r, orders, &mut extra);
            }
        }
        let mut newly = Vec::new();
        let mut missing = Vec::new();
        for g in hyp {
            if orig.contains(g) {
                continue;
            }
            if extra.contains(g) {
                newly.push(g);
            } else {
                missing.push(g);
            }
        }
        (newly, missing)
    });

    let mut newly = HashMap::new();
    let mut missing = HashMap::new();
    for (a, b) in per_segment {
        for g in a {
            *newly.entry(g).or_insert(0) += 1;
        }
        for g in b {
            *missing.entry(g).or_insert(0) += 1;
        }
    }
    Ok(CoverageTables {
        newly_matched: into_table(newly),
        missing: into_table(missing),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    pub samples: Vec<f64>,
}

pub const DEFAULT_SAMPLES_PER_SIZE: usize = 10;

/// Pearson correlation with `human` of system scores recomputed on random
/// segment subsets. `score_subset` receives sorted segment indices and
/// returns one score per system. Sample `j` of size `sizes[s]` is drawn
/// with a generator seeded by `seed + s * samples_per_size + j`.
pub fn subset_correlation_curve<F>(
    human: &BTreeMap<String, f64>,
    total_segments: usize,
    sizes: &[usize],
    samples_per_size: usize,
    seed: u64,
    score_subset: F,
) -> Result<Vec<CurvePoint>>
where
    F: Fn(&[usize]) -> Result<BTreeMap<String, f64>> + Sync,
{
    if samples_per_size == 0 {
        return Err(Error::config("samples per size must be positive"));
    }
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0 || s > total_segments) {
        return Err(Error::config(format!(
            "subset size {bad} outside 1..={total_segments}"
        )));
    }
    let names: Vec<&String> = human.keys().collect();
    let h: Vec<f64> = human.values().copied().collect();
    let flat = par::try_map_range(sizes.len() * samples_per_size, |idx| {
        let size = sizes[idx / samples_per_size];
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let mut subset = rand::seq::index::sample(&mut rng, total_segments, size).into_vec();
        subset.sort_unstable();
        let scores = score_subset(&subset)?;
        let m = names
            .iter()
            .map(|name| {
                scores
                    .get(*name)
                    .copied()
                    .ok_or_else(|| Error::Missing(format!("metric score for system {name}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        pearson(&h, &m)
    })?;
    Ok(sizes
        .iter()
        .zip(flat.chunks(samples_per_size))
        .map(|(&size, samples)| {
            let (mut mean, mut m2) = (0.0, 0.0);
            for (k, &r) in samples.iter().enumerate() {
                let d = r - mean;
                mean += d / (k + 1) as f64;
                m2 += d * (r - mean);
            }
            CurvePoint {
                size,
                mean,
                std: (m2 / samples.len() as f64).sqrt(),
                samples: samples.to_vec(),
            }
        })
        .collect())
}

/// [`subset_correlation_curve`] with corpus BLEU as the system-level metric.
pub fn bleu_subset_curve(
    human: &BTreeMap<String, f64>,
    systems: &BTreeMap<String, Vec<Segment>>,
    refs: &[Vec<Segment>],
    config: &BleuConfig,
    sizes: &[usize],
    samples_per_size: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let mut per_system: BTreeMap<&String, Vec<BleuStats>> = BTreeMap::new();
    for name in human.keys() {
        let hyps = systems
            .get(name)
            .ok_or_else(|| Error::Missing(format!("outputs of system {name}")))?;
        per_system.insert(name, corpus_stats(hyps, refs, config)?);
    }
    subset_correlation_curve(human, refs.len(), sizes, samples_per_size, seed, |subset| {
        Ok(per_system
            .iter()
            .map(|(name, stats)| {
                let picked: Vec<BleuStats> = subset.iter().map(|&i| stats[i].clone()).collect();
                let total = sum_stats(&picked, config.max_order);
                ((*name).clone(), score_from_stats(&total, config, false).score)
            })
            .collect())
    })
}
