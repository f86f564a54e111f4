//! One function per acceptance criterion. Each returns a short summary on
//! success and a description of the first failures otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use refcover::bleu::{self, BleuConfig, BleuStats};
use refcover::clustering::{kmeans_traced, EmbeddingMatrix};
use refcover::diversity::{diversity_score, ds_bow, ds_tree};
use refcover::mining::{
    filter_subsequences, find_unrewarded_ngrams, mine_constraints, split_protocol, SystemOutputs,
};
use refcover::par::with_threads;
use refcover::stats::{
    bootstrap_tau_significance, decision_flip_analysis, kendall_tau_rr, pair_outcomes, pearson,
    subset_correlation_curve, williams_test, RankedPair, RelativeRankingPairs, SegmentScores, Tail, TiePolicy,
};
use refcover::text::{tokenize_v13a, Segment};
use refcover::trees::{normalized_tree_similarity, tree_kernel, KernelConfig};
use serde_json::Value;

use super::*;

pub type Outcome = Result<String, String>;

fn fail_if(problems: Vec<String>, ok: String) -> Outcome {
    if problems.is_empty() {
        Ok(ok)
    } else {
        let n = problems.len();
        let head: Vec<_> = problems.into_iter().take(5).collect();
        Err(format!("{n} problem(s): {}", head.join("; ")))
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub struct BleuFixture {
    pub hyps: Vec<Segment>,
    pub refs1: Vec<Vec<Segment>>,
    pub refs2: Vec<Vec<Segment>>,
}

pub fn bleu_fixture() -> BleuFixture {
    let tok = |name: &str| fixture_lines(name).iter().map(|l| tokenize_v13a(l)).collect::<Vec<_>>();
    let hyps = tok("hyp.txt");
    let r1 = tok("ref.txt");
    let r2 = tok("ref2.txt");
    BleuFixture {
        refs1: r1.iter().map(|r| vec![r.clone()]).collect(),
        refs2: r1.iter().zip(&r2).map(|(a, b)| vec![a.clone(), b.clone()]).collect(),
        hyps,
    }
}

/// Criterion 1.
pub fn bleu_parity() -> Outcome {
    let mut problems = Vec::new();
    for case in fixture_json("tokenizer_13a.json").as_array().unwrap() {
        let raw = case["raw"].as_str().unwrap();
        let want: Vec<&str> = case["tokens"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
        if tokenize_v13a(raw).tokens() != want.as_slice() {
            problems.push(format!("tokenizer differs on {raw:?}"));
        }
    }

    let expected = fixture_json("bleu_expected.json");
    let start = Instant::now();
    let fx = bleu_fixture();
    let corpus_cfg = BleuConfig::default();
    let sent_cfg = BleuConfig::sentence();
    let c1 = bleu::corpus_bleu(&fx.hyps, &fx.refs1, &corpus_cfg).unwrap();
    let c2 = bleu::corpus_bleu(&fx.hyps, &fx.refs2, &corpus_cfg).unwrap();
    let s1 = bleu::sentence_bleu_all(&fx.hyps, &fx.refs1, &sent_cfg).unwrap();
    let s2 = bleu::sentence_bleu_all(&fx.hyps, &fx.refs2, &sent_cfg).unwrap();
    let elapsed = start.elapsed();

    let mut worst: f64 = 0.0;
    let mut compare = |label: String, got: &bleu::BleuScore, want: &Value| {
        let w = want["score"].as_f64().unwrap();
        let d = (got.score_x100() - w).abs();
        worst = worst.max(d);
        if d > 0.01 {
            problems.push(format!("{label}: {} vs {w}", got.score_x100()));
        }
        if got.hyp_len != want["sys_len"].as_u64().unwrap() || got.ref_len != want["ref_len"].as_u64().unwrap() {
            problems.push(format!("{label}: lengths {}/{}", got.hyp_len, got.ref_len));
        }
    };
    compare("corpus, 1 ref".into(), &c1, &expected["corpus_single_ref"]);
    compare("corpus, 2 refs".into(), &c2, &expected["corpus_two_refs"]);
    for (i, (got, want)) in s1.iter().zip(expected["sentence_single_ref"].as_array().unwrap()).enumerate() {
        compare(format!("sentence {i}, 1 ref"), got, want);
    }
    for (i, (got, want)) in s2.iter().zip(expected["sentence_two_refs"].as_array().unwrap()).enumerate() {
        compare(format!("sentence {i}, 2 refs"), got, want);
    }
    if s1.len() != 100 || s2.len() != 100 {
        problems.push(format!("expected 100 sentence scores, got {}/{}", s1.len(), s2.len()));
    }
    if elapsed.as_secs_f64() >= 1.0 {
        problems.push(format!("fixture took {elapsed:?}"));
    }
    fail_if(
        problems,
        format!("max |diff| {worst:.2e} BLEU over 202 scores, {:.1} ms", elapsed.as_secs_f64() * 1e3),
    )
}

/// Criterion 2.
pub fn multi_reference_monotonicity(segments: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let cfg = BleuConfig::default();
    let mut problems = Vec::new();
    let mut acc = vec![BleuStats::zero(4); 5];
    for i in 0..segments {
        let vocab = rng.random_range(3..12);
        let hyp = random_segment(&mut rng, vocab, 0, 15);
        let refs: Vec<Segment> = (0..5).map(|_| random_segment(&mut rng, vocab, 1, 15)).collect();
        let mut prev: Option<BleuStats> = None;
        for k in 1..=5 {
            let s = bleu::segment_stats(&hyp, &refs[..k], &cfg).unwrap();
            if let Some(p) = &prev {
                for n in 0..4 {
                    if s.matches[n] < p.matches[n] {
                        problems.push(format!("segment {i}: order {} numerator drops at {k} refs", n + 1));
                    }
                }
            }
            acc[k - 1] += &s;
            prev = Some(s);
        }
    }
    for k in 1..5 {
        for n in 0..4 {
            if acc[k].matches[n] < acc[k - 1].matches[n] {
                problems.push(format!("corpus order {} numerator drops at {} refs", n + 1, k + 1));
            }
        }
    }
    let growth: Vec<String> = (0..4).map(|n| format!("{}->{}", acc[0].matches[n], acc[4].matches[n])).collect();
    fail_if(problems, format!("{segments} segments, 0 violations; numerators 1->5 refs {}", growth.join(", ")))
}

/// Criterion 3.
pub fn kernel_oracle(pairs: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut problems = Vec::new();
    let (mut checked, mut nonzero) = (0, 0);
    for i in 0..pairs {
        let a = random_tree(&mut rng, 10);
        let b = if rng.random_bool(0.2) { a.clone() } else { random_tree(&mut rng, 10) };
        for sigma in [0u8, 1] {
            for include_leaves in [false, true] {
                for shift in [0u32, 1, 2] {
                    let cfg = KernelConfig {
                        lambda: 1.0 / f64::from(1u32 << shift),
                        sigma,
                        include_leaves,
                    };
                    let (num, exp) = brute_force_kernel_scaled(&a, &b, shift, sigma, include_leaves);
                    let got = tree_kernel(&a, &b, &cfg) * 2f64.powi(exp as i32);
                    checked += 1;
                    nonzero += usize::from(num > 0);
                    if (got - num as f64).abs() > 1e-9 {
                        problems.push(format!("pair {i} ({a} | {b}), {cfg:?}: {got} vs {num}"));
                    }
                }
                let cfg = KernelConfig {
                    lambda: 0.5,
                    sigma,
                    include_leaves,
                };
                let s = normalized_tree_similarity(&a, &a.clone(), &cfg).unwrap();
                if (s - 1.0).abs() > 1e-12 {
                    problems.push(format!("self-similarity of {a} is {s}"));
                }
            }
        }
    }
    fail_if(problems, format!("{pairs} pairs, {checked} kernel values exact ({nonzero} nonzero), self-similarity 1"))
}

/// Criterion 4.
pub fn diversity_properties(sets: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut problems = Vec::new();
    let cfg = KernelConfig::default();

    let tok = Segment::from_tokenized;
    let hand = ds_bow(&[tok("the cat sat"), tok("the cat slept here"), tok("a dog barked")]).unwrap();
    if !close(hand, 17.0 / 21.0, 1e-9) {
        problems.push(format!("3-paraphrase example gives {hand}, expected 17/21"));
    }
    let two = ds_bow(&[tok("the cat sat"), tok("the cat slept here")]).unwrap();
    if !close(two, 1.0 - 2.0 / 3.5, 1e-9) {
        problems.push(format!("2-paraphrase example gives {two}"));
    }

    for i in 0..sets {
        let n = rng.random_range(2..6);
        let vocab = rng.random_range(2..20);
        let items: Vec<Segment> = (0..n).map(|_| random_segment(&mut rng, vocab, 1, 8)).collect();
        let trees: Vec<_> = (0..n).map(|_| random_tree(&mut rng, 10)).collect();
        let b = ds_bow(&items).unwrap();
        let t = ds_tree(&trees, &cfg).unwrap();
        if !(0.0..=1.0).contains(&b) || !(0.0..=1.0).contains(&t) {
            problems.push(format!("set {i}: DS out of range ({b}, {t})"));
        }

        let same = vec![items[0].clone(); n];
        let same_t = vec![trees[0].clone(); n];
        let distinct = items[0].tokens().iter().collect::<BTreeSet<_>>().len() == items[0].len();
        let bs = ds_bow(&same).unwrap();
        let ts = ds_tree(&same_t, &cfg).unwrap();
        if (distinct && bs != 0.0) || ts.abs() > 1e-12 {
            problems.push(format!("set {i}: identical set gives ({bs}, {ts})"));
        }

        let disjoint: Vec<Segment> = (0..n)
            .map(|k| Segment::from_tokens((0..rng.random_range(1..6)).map(|j| format!("v{k}_{j}"))))
            .collect();
        let d = ds_bow(&disjoint).unwrap();
        if d != 1.0 {
            problems.push(format!("set {i}: disjoint vocabularies give {d}"));
        }
    }
    fail_if(
        problems,
        format!("{sets} random sets in [0,1]; identical 0, disjoint 1; 3-paraphrase example {hand:.12} = 17/21"),
    )
}

const THRESHOLDS: [(u64, u64); 5] = [(3, 4), (1, 2), (2, 3), (1, 1), (7, 10)];

/// Criterion 5.
pub fn mining_oracle(instances: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut problems = Vec::new();
    let mut total_constraints = 0;
    for inst in 0..instances {
        let segments = rng.random_range(1..4);
        let n_voters = rng.random_range(4..=10);
        let vocab = rng.random_range(3..8);
        let (num, den) = THRESHOLDS[rng.random_range(0..THRESHOLDS.len())];
        let threshold = num as f64 / den as f64;
        let orders: Vec<usize> = match rng.random_range(0..3) {
            0 => vec![2],
            1 => vec![2, 3, 4],
            _ => vec![1, 3],
        };
        let refs: Vec<Vec<Segment>> = (0..segments)
            .map(|_| (0..rng.random_range(1..3)).map(|_| random_segment(&mut rng, vocab, 0, 6)).collect())
            .collect();
        // Voters share a common draft so that some n-grams reach the threshold.
        let drafts: Vec<Vec<String>> = (0..segments).map(|_| random_tokens(&mut rng, vocab, 2, 8)).collect();
        let voters: Vec<Vec<Segment>> = (0..n_voters)
            .map(|_| {
                drafts
                    .iter()
                    .map(|d| {
                        let edited = d
                            .iter()
                            .map(|t| if rng.random_bool(0.2) { format!("w{}", rng.random_range(0..vocab)) } else { t.clone() });
                        Segment::from_tokens(edited)
                    })
                    .collect()
            })
            .collect();

        for i in 0..segments {
            let segs: Vec<&Segment> = voters.iter().map(|v| &v[i]).collect();
            let got = find_unrewarded_ngrams(&refs[i], &segs, &orders, threshold);
            let want = oracle_unrewarded(&refs[i], &segs, &orders, (num, den));
            if got != want {
                problems.push(format!("instance {inst} segment {i}: unrewarded n-grams differ"));
                continue;
            }
            let keys: BTreeSet<Vec<String>> = got.keys().cloned().collect();
            if filter_subsequences(&keys) != oracle_maximal(&keys) {
                problems.push(format!("instance {inst} segment {i}: maximal sets differ"));
            }
        }

        let systems: BTreeMap<String, Vec<Segment>> =
            voters.iter().enumerate().map(|(k, v)| (format!("sys{k:02}"), v.clone())).collect();
        let outputs = SystemOutputs::new(systems).unwrap();
        let set = mine_constraints(&refs, &outputs, &orders, threshold).unwrap();
        total_constraints += set.total_constraints();
        for v in check_constraint_set(&set, &refs, &voters, (num, den)) {
            problems.push(format!("instance {inst}: {v}"));
        }
    }
    fail_if(
        problems,
        format!("{instances} instances match the oracle; {total_constraints} constraints re-checked, 0 violations"),
    )
}

fn random_ranking_instance(rng: &mut impl Rng) -> (RelativeRankingPairs, SegmentScores, SegmentScores) {
    let systems = rng.random_range(2..6);
    let segments = rng.random_range(1..20);
    let mut pairs = Vec::new();
    for seg in 0..segments {
        for a in 0..systems {
            for b in a + 1..systems {
                if rng.random_bool(0.6) {
                    let (better, worse) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
                    pairs.push(RankedPair {
                        segment: seg,
                        better: format!("s{better}"),
                        worse: format!("s{worse}"),
                    });
                }
            }
        }
    }
    if pairs.is_empty() {
        pairs.push(RankedPair {
            segment: 0,
            better: "s0".into(),
            worse: "s1".into(),
        });
    }
    let mut scores = || -> SegmentScores {
        let mut m = SegmentScores::new();
        for seg in 0..segments {
            for s in 0..systems {
                m.insert((format!("s{s}"), seg), f64::from(rng.random_range(0..4u8)));
            }
        }
        m
    };
    let base = scores();
    let new = scores();
    (RelativeRankingPairs { pairs }, base, new)
}

/// Criterion 6.
pub fn statistics(instances: usize, seed: u64) -> Outcome {
    let mut problems = Vec::new();

    let mut worst: f64 = 0.0;
    let cases = fixture_json("correlation_expected.json");
    let cases = cases.as_array().unwrap();
    for (i, c) in cases.iter().enumerate() {
        let v = |k: &str| -> Vec<f64> { c[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
        let (h, cand, base) = (v("human"), v("candidate"), v("baseline"));
        let r12 = pearson(&h, &cand).unwrap();
        let r13 = pearson(&h, &base).unwrap();
        let r23 = pearson(&cand, &base).unwrap();
        let one = williams_test(r12, r13, r23, h.len(), Tail::One).unwrap();
        let two = williams_test(r12, r13, r23, h.len(), Tail::Two).unwrap();
        for (name, got, key) in [
            ("r12", r12, "r12"),
            ("r13", r13, "r13"),
            ("r23", r23, "r23"),
            ("t", one.t, "t"),
            ("p one-sided", one.p, "p_one_sided"),
            ("p two-sided", two.p, "p_two_sided"),
        ] {
            let want = c[key].as_f64().unwrap();
            worst = worst.max((got - want).abs());
            if !close(got, want, 1e-6) {
                problems.push(format!("case {i}: {name} {got} vs {want}"));
            }
        }
        let swapped = williams_test(r13, r12, r23, h.len(), Tail::One).unwrap();
        if swapped.t != -one.t {
            problems.push(format!("case {i}: t not antisymmetric ({} vs {})", one.t, swapped.t));
        }
        let tied = williams_test(r12, r12, r12 * r12, h.len(), Tail::One).unwrap();
        if tied.t != 0.0 || tied.p != 0.5 {
            problems.push(format!("case {i}: equal correlations give t={} p={}", tied.t, tied.p));
        }
    }

    let mut rng = rng(seed);
    for inst in 0..instances {
        let (pairs, base, new) = random_ranking_instance(&mut rng);
        let tb = kendall_tau_rr(&pairs, &base, TiePolicy::Discordant).unwrap();
        let tn = kendall_tau_rr(&pairs, &new, TiePolicy::Discordant).unwrap();
        let f = decision_flip_analysis(&base, &new, &pairs).unwrap();
        let ob: i64 = pair_outcomes(&pairs, &base, TiePolicy::Discordant).unwrap().iter().map(|&o| i64::from(o)).sum();
        let on: i64 = pair_outcomes(&pairs, &new, TiePolicy::Discordant).unwrap().iter().map(|&o| i64::from(o)).sum();
        if on - ob != 2 * (f.improved as i64 - f.degraded as i64) {
            problems.push(format!("instance {inst}: numerator identity fails"));
        }
        let lhs = tn - tb;
        let rhs = 2.0 * (f.improved_pct - f.degraded_pct) / 100.0;
        if !close(lhs, rhs, 1e-12) {
            problems.push(format!("instance {inst}: tau difference {lhs} vs {rhs}"));
        }
        if !(-1.0..=1.0).contains(&tb) || f.improved_pct + f.degraded_pct > 100.0 {
            problems.push(format!("instance {inst}: out of range"));
        }
    }
    fail_if(
        problems,
        format!(
            "{} fixture cases within {worst:.1e}; antisymmetry and t=0 => p=0.5 exact; tau/flip identity on {instances} instances",
            cases.len()
        ),
    )
}

/// Location of the optional WMT19 data, if configured.
pub fn wmt19_dir() -> Option<PathBuf> {
    std::env::var_os("REFCOVER_WMT19_DIR").map(PathBuf::from).filter(|p| p.is_dir())
}

/// Criterion 7. Expects, under `dir/de-en/`: `ref.txt`, `systems/<name>.txt`,
/// `da_sys.tsv` (system, score) and `da_seg.tsv` (system, 0-based segment,
/// score) or `darr.tsv` (0-based segment, better, worse).
pub fn wmt19_reproduction(dir: &Path) -> Outcome {
    use refcover::io;
    use refcover::stats::{da_to_relative_ranking, DEFAULT_MIN_GAP};

    let lp = dir.join("de-en");
    let err = |e: refcover::Error| e.to_string();
    let refs: Vec<Vec<Segment>> = io::read_segments(lp.join("ref.txt"), false).map_err(err)?.into_iter().map(|r| vec![r]).collect();
    let systems = io::read_system_dir(lp.join("systems"), false).map_err(err)?;
    let human = io::read_system_scores(lp.join("da_sys.tsv")).map_err(err)?;

    let pairs = if lp.join("darr.tsv").is_file() {
        let mut pairs = Vec::new();
        for (i, line) in io::read_lines(lp.join("darr.tsv")).map_err(err)?.iter().enumerate() {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(format!("darr.tsv line {}: expected 3 columns", i + 1));
            }
            pairs.push(RankedPair {
                segment: f[0].parse().map_err(|_| format!("darr.tsv line {}: bad segment", i + 1))?,
                better: f[1].to_string(),
                worse: f[2].to_string(),
            });
        }
        RelativeRankingPairs { pairs }
    } else {
        da_to_relative_ranking(&io::read_segment_scores(lp.join("da_seg.tsv")).map_err(err)?, DEFAULT_MIN_GAP)
    };

    let sent_cfg = BleuConfig::sentence();
    let mut seg_scores = SegmentScores::new();
    let mut sys_bleu = BTreeMap::new();
    for (name, hyps) in &systems {
        if hyps.len() != refs.len() {
            return Err(format!("system {name}: {} lines, reference has {}", hyps.len(), refs.len()));
        }
        for (i, s) in bleu::sentence_bleu_all(hyps, &refs, &sent_cfg).map_err(err)?.iter().enumerate() {
            seg_scores.insert((name.clone(), i), s.score);
        }
        if human.contains_key(name) {
            sys_bleu.insert(name.clone(), bleu::corpus_bleu(hyps, &refs, &BleuConfig::default()).map_err(err)?.score);
        }
    }
    let tau = kendall_tau_rr(&pairs, &seg_scores, TiePolicy::Discordant).map_err(err)?;
    let h: Vec<f64> = sys_bleu.keys().map(|k| human[k]).collect();
    let m: Vec<f64> = sys_bleu.values().copied().collect();
    let r = pearson(&h, &m).map_err(err)?;

    let mut problems = Vec::new();
    if pairs.len() != 85_365 {
        problems.push(format!("pair count {} (expected 85365)", pairs.len()));
    }
    if !close(tau, 0.055, 0.005) {
        problems.push(format!("segment tau {tau:.4} (expected 0.055 +- 0.005)"));
    }
    if !close(r, 0.890, 0.005) {
        problems.push(format!("system Pearson {r:.4} (expected 0.890 +- 0.005)"));
    }
    fail_if(problems, format!("de-en: {} pairs, tau {tau:.4}, Pearson {r:.4}", pairs.len()))
}

/// Everything criterion 8 compares, serialized.
pub fn deterministic_artifacts(seed: u64) -> Vec<(&'static str, Vec<u8>)> {
    let mut rng = rng(seed);
    let mut out = Vec::new();

    let names: Vec<String> = (0..14).map(|i| format!("system-{i:02}")).collect();
    let refs: Vec<Vec<Segment>> = (0..60).map(|_| vec![random_segment(&mut rng, 8, 3, 12)]).collect();
    let systems: BTreeMap<String, Vec<Segment>> = names
        .iter()
        .map(|n| (n.clone(), (0..60).map(|_| random_segment(&mut rng, 8, 3, 12)).collect()))
        .collect();
    let scores: BTreeMap<String, f64> = names.iter().map(|n| (n.clone(), rng.random_range(0.0..100.0))).collect();
    let all = SystemOutputs::new(systems.clone()).unwrap().with_scores(scores.clone());
    let splits = split_protocol(&names, 10, seed).unwrap();
    let mut mined = Vec::new();
    for s in &splits {
        let voters = all.subset(&s.mining).unwrap();
        mined.push(mine_constraints(&refs, &voters, &[2, 3], 0.5).unwrap());
    }
    out.push(("split protocol", serde_json::to_vec(&(&splits, &mined)).unwrap()));

    let (pairs, base, new) = random_ranking_instance(&mut rng);
    let p = bootstrap_tau_significance(&base, &new, &pairs, 1000, seed, TiePolicy::Discordant).unwrap();
    out.push(("bootstrap", p.to_le_bytes().to_vec()));

    let rows: Vec<Vec<f32>> = (0..400)
        .map(|i| (0..16).map(|_| rng.random_range(-1.0f32..1.0) + (i % 5) as f32 * 3.0).collect())
        .collect();
    let x = EmbeddingMatrix::from_rows(&rows).unwrap();
    let (model, trace) = kmeans_traced(&x, 5, 100, seed).unwrap();
    let mut bytes = model.centroids.to_bytes();
    bytes.extend(serde_json::to_vec(&(model.info(), trace)).unwrap());
    out.push(("k-means", bytes));

    let curve = subset_correlation_curve(&scores, 60, &[10, 30, 60], 10, seed, |subset| {
        Ok(systems
            .iter()
            .map(|(n, outs)| {
                let sub_h: Vec<Segment> = subset.iter().map(|&i| outs[i].clone()).collect();
                let sub_r: Vec<Vec<Segment>> = subset.iter().map(|&i| refs[i].clone()).collect();
                (n.clone(), bleu::corpus_bleu(&sub_h, &sub_r, &BleuConfig::uniform(2)).unwrap().score)
            })
            .collect())
    })
    .unwrap();
    out.push(("subset curve", serde_json::to_vec(&curve).unwrap()));
    out
}

/// Criterion 8.
pub fn determinism(seed: u64) -> Outcome {
    let a = with_threads(1, || deterministic_artifacts(seed));
    let b = with_threads(1, || deterministic_artifacts(seed));
    let c = with_threads(8, || deterministic_artifacts(seed));
    let mut problems = Vec::new();
    for ((name, x), ((_, y), (_, z))) in a.iter().zip(b.iter().zip(&c)) {
        if x != y {
            problems.push(format!("{name} differs between runs"));
        }
        if x != z {
            problems.push(format!("{name} differs between 1 and 8 threads"));
        }
    }
    let names: Vec<&str> = a.iter().map(|(n, _)| *n).collect();
    fail_if(problems, format!("{} byte-identical across runs and 1 vs 8 threads", names.join(", ")))
}

/// Diversity invariant helper: DS recomputed from scratch by brute force.
pub fn brute_force_ds<T>(items: &[T], delta: impl Fn(&T, &T) -> f64) -> f64 {
    let n = items.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += 1.0 - delta(&items[i], &items[j]);
            }
        }
    }
    s / (n * (n - 1)) as f64
}

pub fn ds_with(items: &[Segment]) -> f64 {
    diversity_score(items, refcover::diversity::delta_bow).unwrap()
}
