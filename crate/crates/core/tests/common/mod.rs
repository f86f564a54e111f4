#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use refcover::mining::ConstraintSet;
use refcover::text::Segment;
use refcover::trees::ParseTree;
use serde_json::Value;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_lines(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixture_path(name))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

pub fn fixture_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tokens(rng: &mut impl Rng, vocab: usize, min: usize, max: usize) -> Vec<String> {
    let len = rng.random_range(min..=max);
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect()
}

pub fn random_segment(rng: &mut impl Rng, vocab: usize, min: usize, max: usize) -> Segment {
    Segment::from_tokens(random_tokens(rng, vocab, min, max))
}

/// Random tree with at most `max_nodes` nodes; words are lexical leaves
/// under preterminals.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize) -> ParseTree {
    let mut budget = rng.random_range(1..=max_nodes);
    grow(rng, &mut budget, 0)
}

fn grow(rng: &mut impl Rng, budget: &mut usize, depth: usize) -> ParseTree {
    const LABELS: [&str; 3] = ["A", "B", "C"];
    const WORDS: [&str; 2] = ["x", "y"];
    *budget -= 1;
    let label = LABELS[rng.random_range(0..LABELS.len())];
    if *budget >= 1 && rng.random_bool(0.25) {
        *budget -= 1;
        return ParseTree::node(label, vec![ParseTree::leaf(WORDS[rng.random_range(0..WORDS.len())])]);
    }
    let mut children = Vec::new();
    let want = if depth > 3 { 0 } else { rng.random_range(0..=3) };
    for _ in 0..want {
        if *budget == 0 {
            break;
        }
        children.push(grow(rng, budget, depth + 1));
    }
    ParseTree::node(label, children)
}

/// All fragments rooted at `t`, as (canonical string, included node count).
/// A cut child (subset trees only) renders as `[label]`.
fn fragments(t: &ParseTree, sigma: u8, include_leaves: bool) -> Vec<(String, u32)> {
    let key = |n: &ParseTree| format!("{}{}", if n.is_lexical_leaf { "'" } else { "" }, n.label);
    let kids: Vec<&ParseTree> = t
        .children
        .iter()
        .filter(|c| include_leaves || !c.is_lexical_leaf)
        .collect();
    if kids.is_empty() {
        return vec![(format!("({})", key(t)), 1)];
    }
    let mut acc: Vec<(String, u32)> = vec![(String::new(), 1)];
    for c in kids {
        let mut options = fragments(c, sigma, include_leaves);
        if sigma == 1 {
            options.push((format!("[{}]", key(c)), 0));
        }
        acc = acc
            .iter()
            .flat_map(|(s, n)| options.iter().map(move |(o, m)| (format!("{s} {o}"), n + m)))
            .collect();
    }
    acc.into_iter().map(|(s, n)| (format!("({}{s})", key(t)), n)).collect()
}

fn all_nodes<'a>(t: &'a ParseTree, include_leaves: bool, out: &mut Vec<&'a ParseTree>) {
    if t.is_lexical_leaf && !include_leaves {
        return;
    }
    out.push(t);
    for c in &t.children {
        all_nodes(c, include_leaves, out);
    }
}

fn fragment_counts(t: &ParseTree, sigma: u8, include_leaves: bool) -> HashMap<(String, u32), u64> {
    let mut nodes = Vec::new();
    all_nodes(t, include_leaves, &mut nodes);
    let mut counts = HashMap::new();
    for n in nodes {
        for f in fragments(n, sigma, include_leaves) {
            *counts.entry(f).or_insert(0) += 1;
        }
    }
    counts
}

/// Brute-force kernel with `lambda = 1/2^shift`, returned exactly as an
/// integer numerator over `2^(shift * max_size)` together with that exponent.
pub fn brute_force_kernel_scaled(
    t1: &ParseTree,
    t2: &ParseTree,
    shift: u32,
    sigma: u8,
    include_leaves: bool,
) -> (u128, u32) {
    let c1 = fragment_counts(t1, sigma, include_leaves);
    let c2 = fragment_counts(t2, sigma, include_leaves);
    let max_size = c1.keys().map(|(_, n)| *n).max().unwrap_or(0);
    let mut num: u128 = 0;
    for (f, a) in &c1 {
        if let Some(b) = c2.get(f) {
            num += u128::from(a * b) << (shift * (max_size - f.1));
        }
    }
    (num, shift * max_size)
}

/// Exact rational threshold `num / den` for the mining oracle.
pub fn oracle_unrewarded(
    refs: &[Segment],
    voters: &[&Segment],
    orders: &[usize],
    threshold: (u64, u64),
) -> BTreeMap<Vec<String>, usize> {
    let contains = |hay: &[String], g: &[String]| hay.len() >= g.len() && (0..=hay.len() - g.len()).any(|i| &hay[i..i + g.len()] == g);
    let mut candidates: BTreeSet<Vec<String>> = BTreeSet::new();
    for v in voters {
        for &n in orders {
            let t = v.tokens();
            if n <= t.len() {
                for i in 0..=t.len() - n {
                    candidates.insert(t[i..i + n].to_vec());
                }
            }
        }
    }
    let (num, den) = threshold;
    let mut out = BTreeMap::new();
    for g in candidates {
        if refs.iter().any(|r| contains(r.tokens(), &g)) {
            continue;
        }
        let votes = voters.iter().filter(|v| contains(v.tokens(), &g)).count();
        if votes >= 1 && votes as u64 * den >= num * voters.len() as u64 {
            out.insert(g, votes);
        }
    }
    out
}

pub fn oracle_maximal(set: &BTreeSet<Vec<String>>) -> BTreeSet<Vec<String>> {
    let inside = |s: &Vec<String>, l: &Vec<String>| {
        s.len() < l.len() && (0..=l.len() - s.len()).any(|i| l[i..i + s.len()] == s[..])
    };
    set.iter().filter(|g| !set.iter().any(|l| inside(g, l))).cloned().collect()
}

/// Re-verifies every invariant of a constraint set from first principles.
/// Returns human-readable violations.
pub fn check_constraint_set(
    set: &ConstraintSet,
    refs: &[Vec<Segment>],
    voters: &[Vec<Segment>],
    threshold: (u64, u64),
) -> Vec<String> {
    let mut bad = Vec::new();
    if set.records.len() != refs.len() {
        bad.push(format!("{} records for {} segments", set.records.len(), refs.len()));
    }
    for (i, rec) in set.records.iter().enumerate() {
        if rec.segment != i {
            bad.push(format!("record {i} has segment {}", rec.segment));
        }
        if rec.constraints.len() != rec.votes.len() {
            bad.push(format!("segment {i}: constraints/votes length differ"));
        }
        let toks: Vec<Vec<&str>> = rec.constraints.iter().map(|c| c.split(' ').collect()).collect();
        let joined = |t: &[&str]| format!(" {} ", t.join(" "));
        for (k, t) in toks.iter().enumerate() {
            if !set.orders.contains(&t.len()) {
                bad.push(format!("segment {i}: {:?} has order {}", rec.constraints[k], t.len()));
            }
            let needle = joined(t);
            for r in &refs[i] {
                if joined(&r.tokens().iter().map(String::as_str).collect::<Vec<_>>()).contains(&needle) {
                    bad.push(format!("segment {i}: {:?} occurs in a reference", rec.constraints[k]));
                }
            }
            let votes = voters
                .iter()
                .filter(|v| joined(&v[i].tokens().iter().map(String::as_str).collect::<Vec<_>>()).contains(&needle))
                .count();
            if (votes as u64) * threshold.1 < threshold.0 * voters.len() as u64 {
                bad.push(format!("segment {i}: {:?} has only {votes} votes", rec.constraints[k]));
            }
            if (rec.votes[k] - votes as f64 / voters.len() as f64).abs() > 1e-12 {
                bad.push(format!("segment {i}: recorded vote share {} is wrong", rec.votes[k]));
            }
            for (m, other) in toks.iter().enumerate() {
                if m != k && other.len() > t.len() && joined(other).contains(&needle) {
                    bad.push(format!("segment {i}: {:?} is inside {:?}", rec.constraints[k], rec.constraints[m]));
                }
                if m != k && other == t {
                    bad.push(format!("segment {i}: duplicate {:?}", rec.constraints[k]));
                }
            }
        }
    }
    bad
}
pub mod checks;
