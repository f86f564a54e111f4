//! Output-guided constraints: n-grams that most good systems produce but
//! that no reference contains.
//!
//! For each segment, voters are the outputs of the systems ranked in the
//! top half by human system-level scores. An n-gram qualifies when it is
//! absent from every reference and present in at least `threshold` of the
//! voter outputs; qualifying n-grams contained in longer qualifying n-grams
//! are dropped. Each surviving n-gram is one decoding constraint.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::text::{NGram, Segment};

/// Line-aligned outputs of every system, plus optional human scores.
#[derive(Debug, Clone, Default)]
pub struct SystemOutputs {
    pub systems: BTreeMap<String, Vec<Segment>>,
    pub human_scores: Option<BTreeMap<String, f64>>,
}

impl SystemOutputs {
    pub fn new(systems: BTreeMap<String, Vec<Segment>>) -> Result<Self> {
        let out = SystemOutputs {
            systems,
            human_scores: None,
        };
        out.segment_count()?;
        Ok(out)
    }

    pub fn with_scores(mut self, scores: BTreeMap<String, f64>) -> Self {
        self.human_scores = Some(scores);
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.systems.keys().cloned().collect()
    }

    /// Common segment count; errors if systems disagree.
    pub fn segment_count(&self) -> Result<usize> {
        let mut it = self.systems.iter();
        let Some((_, first)) = it.next() else { return Ok(0) };
        for (name, segs) in it {
            if segs.len() != first.len() {
                return Err(Error::mismatch(format!("segments of system {name}"), first.len(), segs.len()));
            }
        }
        Ok(first.len())
    }

    /// Restricts to the named systems.
    pub fn subset(&self, names: &[String]) -> Result<SystemOutputs> {
        let mut systems = BTreeMap::new();
        for n in names {
            let segs = self
                .systems
                .get(n)
                .ok_or_else(|| Error::Missing(format!("outputs of system {n}")))?;
            systems.insert(n.clone(), segs.clone());
        }
        Ok(SystemOutputs {
            systems,
            human_scores: self.human_scores.clone(),
        })
    }
}

/// The `ceil(S/2)` systems with the highest human score; ties at equal
/// score are broken by name (lexicographically smaller first).
pub fn select_top_half(systems: &SystemOutputs) -> Result<Vec<String>> {
    let scores = systems
        .human_scores
        .as_ref()
        .ok_or_else(|| Error::Missing("human system scores".into()))?;
    let mut ranked = Vec::with_capacity(systems.systems.len());
    for name in systems.systems.keys() {
        let s = scores
            .get(name)
            .ok_or_else(|| Error::Missing(format!("human score for system {name}")))?;
        ranked.push((name.clone(), *s));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let keep = ranked.len().div_ceil(2);
    Ok(ranked.into_iter().take(keep).map(|(n, _)| n).collect())
}

/// Smallest vote count satisfying `count >= threshold · voters`.
pub fn required_votes(threshold: f64, voters: usize) -> usize {
    // Guard against products like 0.7 * 10 = 7.000000000000001.
    let raw = threshold * voters as f64;
    let k = (raw - 1e-9).ceil();
    k.max(0.0) as usize
}

/// N-grams (of the requested orders) absent from every reference and
/// present in at least `threshold` of the voters. Returns each n-gram with
/// the number of voters containing it.
pub fn find_unrewarded_ngrams(
    refs: &[Segment],
    voters: &[&Segment],
    orders: &[usize],
    threshold: f64,
) -> BTreeMap<NGram, usize> {
    let mut out = BTreeMap::new();
    if voters.is_empty() {
        return out;
    }
    let need = required_votes(threshold, voters.len()).max(1);
    let mut in_refs: HashSet<&[String]> = HashSet::new();
    for r in refs {
        for &n in orders {
            in_refs.extend(r.tokens().windows(n.max(1)));
        }
    }
    let mut votes: BTreeMap<&[String], usize> = BTreeMap::new();
    for v in voters {
        let mut present: HashSet<&[String]> = HashSet::new();
        for &n in orders {
            if n == 0 {
                continue;
            }
            present.extend(v.tokens().windows(n).filter(|g| !in_refs.contains(g)));
        }
        for g in present {
            *votes.entry(g).or_insert(0) += 1;
        }
    }
    for (g, c) in votes {
        if c >= need {
            out.insert(g.to_vec(), c);
        }
    }
    out
}

fn is_contiguous_subsequence(short: &[String], long: &[String]) -> bool {
    short.len() < long.len() && long.windows(short.len()).any(|w| w == short)
}

/// Keeps only n-grams that are not a contiguous subsequence of another
/// n-gram in the set.
pub fn filter_subsequences(ngrams: &BTreeSet<NGram>) -> BTreeSet<NGram> {
    let all: Vec<&NGram> = ngrams.iter().collect();
    ngrams
        .iter()
        .filter(|g| !all.iter().any(|other| is_contiguous_subsequence(g, other)))
        .cloned()
        .collect()
}

/// One constraint record per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub segment: usize,
    pub constraints: Vec<String>,
    pub votes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub orders: Vec<usize>,
    pub records: Vec<ConstraintRecord>,
}

impl ConstraintSet {
    /// JSON-lines, one record per segment.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(|e| Error::io("<constraints>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn total_constraints(&self) -> usize {
        self.records.iter().map(|r| r.constraints.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub orders: Vec<usize>,
    pub threshold: f64,
    /// Mine every order into its own constraint set.
    pub separate_orders: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            orders: vec![2, 3, 4],
            threshold: 0.75,
            separate_orders: true,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::config("orders must be a non-empty list of positive integers"));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::config(format!("threshold {} outside (0, 1]", self.threshold)));
        }
        Ok(())
    }

    /// The order groups mined together.
    pub fn order_groups(&self) -> Vec<Vec<usize>> {
        if self.separate_orders {
            self.orders.iter().map(|&n| vec![n]).collect()
        } else {
            vec![self.orders.clone()]
        }
    }
}

/// Mines one constraint set for `orders` from the given voting systems.
pub fn mine_constraints(
    refs: &[Vec<Segment>],
    voters: &SystemOutputs,
    orders: &[usize],
    threshold: f64,
) -> Result<ConstraintSet> {
    let n_segments = voters.segment_count()?;
    if !voters.systems.is_empty() && refs.len() != n_segments {
        return Err(Error::mismatch("reference segments", n_segments, refs.len()));
    }
    let outputs: Vec<&Vec<Segment>> = voters.systems.values().collect();
    let n_voters = outputs.len();
    let records = par::map_range(refs.len(), |i| {
        let segs: Vec<&Segment> = outputs.iter().map(|o| &o[i]).collect();
        let found = find_unrewarded_ngrams(&refs[i], &segs, orders, threshold);
        let keys: BTreeSet<NGram> = found.keys().cloned().collect();
        let kept = filter_subsequences(&keys);
        let (constraints, votes) = kept
            .iter()
            .map(|g| (g.join(" "), found[g] as f64 / n_voters as f64))
            .unzip();
        ConstraintRecord {
            segment: i,
            constraints,
            votes,
        }
    });
    Ok(ConstraintSet {
        orders: orders.to_vec(),
        records,
    })
}

/// Full pipeline: top-half voter selection, then one constraint set per
/// order group of `config`.
pub fn emit_constraints(
    refs: &[Vec<Segment>],
    systems: &SystemOutputs,
    config: &MiningConfig,
) -> Result<Vec<ConstraintSet>> {
    config.validate()?;
    let top = select_top_half(systems)?;
    log::info!("voting systems: {}", top.join(", "));
    let voters = systems.subset(&top)?;
    config
        .order_groups()
        .iter()
        .map(|orders| mine_constraints(refs, &voters, orders, config.threshold))
        .collect()
}

/// One random bisection of the systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSplit {
    /// Systems whose outputs are mined for constraints (`ceil(S/2)`).
    pub mining: Vec<String>,
    /// Systems used to evaluate the resulting references.
    pub evaluation: Vec<String>,
}

/// `repeats` independent uniform bisections; split `i` is drawn from a
/// generator seeded with `seed + i`.
pub fn split_protocol(names: &[String], repeats: usize, seed: u64) -> Result<Vec<SystemSplit>> {
    if names.len() < 2 {
        return Err(Error::Degenerate(format!("splitting needs at least 2 systems, got {}", names.len())));
    }
    let mut sorted = names.to_vec();
    sorted.sort();
    let half = sorted.len().div_ceil(2);
    Ok((0..repeats as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let mut shuffled = sorted.clone();
            shuffled.shuffle(&mut rng);
            let mut mining = shuffled[..half].to_vec();
            let mut evaluation = shuffled[half..].to_vec();
            mining.sort();
            evaluation.sort();
            SystemSplit { mining, evaluation }
        })
        .collect())
}
