//! Lexical (bag-of-words) and syntactic (tree-kernel) diversity of
//! paraphrase sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::text::Segment;
use crate::trees::{normalized_tree_similarity, KernelConfig, ParseTree};

/// The paraphrases of one source segment, optionally with one parse each.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaphraseSet {
    pub segment_id: usize,
    pub items: Vec<Segment>,
    pub parses: Option<Vec<ParseTree>>,
}

/// Unique words shared by `y` and `y2`, divided by their mean token length.
/// Values above 1 (possible when common words repeat) are clamped.
pub fn delta_bow(y: &Segment, y2: &Segment) -> Result<f64> {
    if y.is_empty() || y2.is_empty() {
        return Err(Error::Degenerate("bag-of-words overlap of an empty segment".into()));
    }
    let a: HashSet<&str> = y.tokens().iter().map(String::as_str).collect();
    let common = y2
        .tokens()
        .iter()
        .map(String::as_str)
        .collect::<HashSet<_>>()
        .intersection(&a)
        .count();
    let mean_len = (y.len() + y2.len()) as f64 / 2.0;
    let overlap = common as f64 / mean_len;
    if overlap > 1.0 {
        log::warn!("bag-of-words overlap {overlap:.4} exceeds 1; clamped");
        return Ok(1.0);
    }
    Ok(overlap)
}

/// Normalized tree-kernel similarity of two parses.
pub fn delta_tree(t1: &ParseTree, t2: &ParseTree, cfg: &KernelConfig) -> Result<f64> {
    normalized_tree_similarity(t1, t2, cfg)
}

/// `1/(|Y|(|Y|-1)) · Σ_{y ≠ y'} (1 - Δ(y, y'))` over ordered pairs.
pub fn diversity_score<T, F>(items: &[T], delta: F) -> Result<f64>
where
    F: Fn(&T, &T) -> Result<f64>,
{
    let n = items.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("diversity needs at least 2 items, got {n}")));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += 1.0 - delta(&items[i], &items[j])?;
            }
        }
    }
    Ok(sum / (n * (n - 1)) as f64)
}

pub fn ds_bow(items: &[Segment]) -> Result<f64> {
    diversity_score(items, delta_bow)
}

pub fn ds_tree(parses: &[ParseTree], cfg: &KernelConfig) -> Result<f64> {
    diversity_score(parses, |a, b| delta_tree(a, b, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDiversity {
    pub segment_id: usize,
    pub n: usize,
    pub ds_bow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ds_tree: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    /// Paraphrases per segment (the maximum, in ragged mode).
    pub n: usize,
    pub segments: usize,
    pub ds_bow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ds_tree: Option<f64>,
    pub per_segment: Vec<SegmentDiversity>,
}

#[derive(Debug, Clone, Default)]
pub struct DiversityOptions {
    pub kernel: KernelConfig,
    /// Compute DS_tree; every set then needs aligned parses.
    pub with_trees: bool,
    /// Allow sets of differing sizes.
    pub ragged: bool,
}

/// Unweighted mean of per-segment diversity over a corpus.
pub fn corpus_diversity(sets: &[ParaphraseSet], opts: &DiversityOptions) -> Result<DiversityReport> {
    if sets.is_empty() {
        return Err(Error::Degenerate("no paraphrase sets".into()));
    }
    let n = sets[0].items.len();
    if !opts.ragged {
        if let Some(bad) = sets.iter().find(|s| s.items.len() != n) {
            return Err(Error::mismatch(
                format!("paraphrases of segment {}", bad.segment_id),
                n,
                bad.items.len(),
            ));
        }
    }
    if opts.with_trees {
        for s in sets {
            match &s.parses {
                Some(p) if p.len() == s.items.len() => {}
                Some(p) => {
                    return Err(Error::mismatch(
                        format!("parses of segment {}", s.segment_id),
                        s.items.len(),
                        p.len(),
                    ))
                }
                None => return Err(Error::Missing(format!("parses for segment {}", s.segment_id))),
            }
        }
    }
    let per_segment = par::try_map_range(sets.len(), |i| {
        let s = &sets[i];
        let ds_bow = ds_bow(&s.items).map_err(|e| annotate(s.segment_id, e))?;
        let ds_tree = match (&s.parses, opts.with_trees) {
            (Some(p), true) => Some(ds_tree(p, &opts.kernel).map_err(|e| annotate(s.segment_id, e))?),
            _ => None,
        };
        Ok::<_, Error>(SegmentDiversity {
            segment_id: s.segment_id,
            n: s.items.len(),
            ds_bow,
            ds_tree,
        })
    })?;
    let count = per_segment.len() as f64;
    let ds_bow = per_segment.iter().map(|d| d.ds_bow).sum::<f64>() / count;
    let ds_tree = opts
        .with_trees
        .then(|| per_segment.iter().filter_map(|d| d.ds_tree).sum::<f64>() / count);
    Ok(DiversityReport {
        n: sets.iter().map(|s| s.items.len()).max().unwrap_or(0),
        segments: per_segment.len(),
        ds_bow,
        ds_tree,
        per_segment,
    })
}

fn annotate(segment: usize, e: Error) -> Error {
    match e {
        Error::Degenerate(m) => Error::Degenerate(format!("segment {segment}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_ptb;
    use approx::assert_abs_diff_eq;

    fn seg(s: &str) -> Segment {
        Segment::from_tokenized(s)
    }

    #[test]
    fn bow_overlap() {
        assert_eq!(delta_bow(&seg("a b c"), &seg("a b c")).unwrap(), 1.0);
        assert_eq!(delta_bow(&seg("a b c"), &seg("d e")).unwrap(), 0.0);
        assert_abs_diff_eq!(
            delta_bow(&seg("the cat sat"), &seg("the cat slept here")).unwrap(),
            2.0 / 3.5,
            epsilon = 1e-15
        );
        assert!(delta_bow(&seg(""), &seg("a")).is_err());
    }

    #[test]
    fn ds_formula() {
        let same = vec![seg("x y"), seg("x y"), seg("x y")];
        assert_eq!(ds_bow(&same).unwrap(), 0.0);
        let pair = vec![seg("the cat sat"), seg("the cat slept here")];
        assert_abs_diff_eq!(ds_bow(&pair).unwrap(), 1.0 - 2.0 / 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ds_bow(&pair).unwrap(), 0.4286, epsilon = 1e-4);
        let disjoint = vec![seg("a b"), seg("c d"), seg("e")];
        assert_eq!(ds_bow(&disjoint).unwrap(), 1.0);
        assert!(ds_bow(&[seg("a")]).is_err());
    }

    #[test]
    fn tree_delta() {
        let cfg = KernelConfig::default();
        let a = parse_ptb("(S (A a) (B b))").unwrap();
        let c = parse_ptb("(S (A a) (C c))").unwrap();
        let z = parse_ptb("(X (Y y))").unwrap();
        assert_abs_diff_eq!(delta_tree(&a, &a.clone(), &cfg).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(delta_tree(&a, &z, &cfg).unwrap(), 0.0);
        assert_abs_diff_eq!(delta_tree(&a, &c, &cfg).unwrap(), 0.4444, epsilon = 1e-4);
    }

    #[test]
    fn corpus_means() {
        let sets = vec![
            ParaphraseSet {
                segment_id: 0,
                items: vec![seg("the cat sat"), seg("the cat slept here")],
                parses: None,
            },
            ParaphraseSet {
                segment_id: 1,
                items: vec![seg("a b"), seg("c d")],
                parses: None,
            },
        ];
        let r = corpus_diversity(&sets, &DiversityOptions::default()).unwrap();
        assert_abs_diff_eq!(r.ds_bow, ((1.0 - 2.0 / 3.5) + 1.0) / 2.0, epsilon = 1e-15);
        assert_eq!(r.ds_tree, None);

        let opts = DiversityOptions {
            with_trees: true,
            ..Default::default()
        };
        match corpus_diversity(&sets, &opts) {
            Err(Error::Missing(m)) => assert!(m.contains("segment 0")),
            other => panic!("unexpected {other:?}"),
        }

        let mut ragged = sets.clone();
        ragged[1].items.push(seg("e f"));
        assert!(corpus_diversity(&ragged, &DiversityOptions::default()).is_err());
        let ok = corpus_diversity(&ragged, &DiversityOptions { ragged: true, ..Default::default() }).unwrap();
        assert_eq!(ok.n, 3);
    }

    #[test]
    fn identical_sets_report_zero() {
        let t = parse_ptb("(S (NP (NN x)) (VP (VB y)))").unwrap();
        let sets: Vec<_> = (0..3)
            .map(|i| ParaphraseSet {
                segment_id: i,
                items: vec![seg("x y"); 3],
                parses: Some(vec![t.clone(); 3]),
            })
            .collect();
        let opts = DiversityOptions { with_trees: true, ..Default::default() };
        let r = corpus_diversity(&sets, &opts).unwrap();
        assert_eq!(r.ds_bow, 0.0);
        assert_abs_diff_eq!(r.ds_tree.unwrap(), 0.0, epsilon = 1e-12);
    }
}
