//! Tokenization and n-gram counting shared by every scorer.

use std::collections::HashMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Token sequence produced by [`tokenize_v13a`] (or by splitting already
/// tokenized text on whitespace).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Segment {
    tokens: Vec<String>,
}

impl Segment {
    /// Builds a segment from pre-split tokens. Empty tokens are dropped and
    /// tokens containing whitespace are split further.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokens = tokens
            .into_iter()
            .flat_map(|t| split_ws(t.as_ref()).map(str::to_owned).collect::<Vec<_>>())
            .collect();
        Segment { tokens }
    }

    /// Splits already tokenized text on whitespace without further processing.
    pub fn from_tokenized(text: &str) -> Self {
        Segment {
            tokens: split_ws(text).map(str::to_owned).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

// Whitespace as understood by Python's `str.split()`, which the reference
// scorer uses: Unicode White_Space plus the ASCII information separators.
fn is_py_space(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

fn split_ws(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_py_space).filter(|t| !t.is_empty())
}

static RE_SYMBOLS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([{-~\[-` -&(-+:-@/])").expect("valid regex"));
static RE_PERIOD_COMMA_AFTER_NONDIGIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([^0-9])([.,])").expect("valid regex"));
static RE_PERIOD_COMMA_BEFORE_NONDIGIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([.,])([^0-9])").expect("valid regex"));
static RE_DASH_AFTER_DIGIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([0-9])(-)").expect("valid regex"));

/// WMT `mteval-v13a` tokenization, bit-compatible with the standard scorer.
///
/// Case is preserved. Newlines are treated as spaces except for the
/// hyphenation marker `-\n`, which is removed.
pub fn tokenize_v13a(raw: &str) -> Segment {
    let mut line = raw
        .replace("<skipped>", "")
        .replace("-\n", "")
        .replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let padded = format!(" {line} ");
    let s = RE_SYMBOLS.replace_all(&padded, " ${1} ");
    let s = RE_PERIOD_COMMA_AFTER_NONDIGIT.replace_all(&s, "${1} ${2} ");
    let s = RE_PERIOD_COMMA_BEFORE_NONDIGIT.replace_all(&s, " ${1} ${2}");
    let s = RE_DASH_AFTER_DIGIT.replace_all(&s, "${1} ${2} ");
    Segment::from_tokenized(&s)
}

/// An n-gram as an owned token tuple; its order is its length.
pub type NGram = Vec<String>;

/// Counts of all n-grams of order `1..=max_order` in one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset {
    max_order: usize,
    counts: HashMap<NGram, u32>,
}

impl NGramMultiset {
    pub fn new(max_order: usize) -> Self {
        NGramMultiset {
            max_order,
            counts: HashMap::new(),
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, ngram: &[String]) -> u32 {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NGram, u32)> {
        self.counts.iter().map(|(g, &c)| (g, c))
    }

    /// Number of distinct n-grams stored.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of counts over n-grams of order `n`.
    pub fn total(&self, n: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(g, _)| g.len() == n)
            .map(|(_, &c)| u64::from(c))
            .sum()
    }

    fn set(&mut self, ngram: NGram, count: u32) {
        if count > 0 {
            self.counts.insert(ngram, count);
        }
    }
}

/// Counts every contiguous n-gram of `seg` for `n = 1..=max_order`.
pub fn extract_ngrams(seg: &Segment, max_order: usize) -> NGramMultiset {
    let mut out = NGramMultiset::new(max_order);
    for (g, c) in count_ngrams(seg.tokens(), max_order) {
        out.set(g.to_vec(), c);
    }
    out
}

/// Borrowing n-gram counter used on hot paths.
pub(crate) fn count_ngrams(tokens: &[String], max_order: usize) -> FxHashMap<&[String], u32> {
    let mut counts = FxHashMap::default();
    for n in 1..=max_order.min(tokens.len()) {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Per-n-gram maximum count over several references.
pub(crate) fn max_ref_counts(
    refs: &[Segment],
    max_order: usize,
) -> FxHashMap<&[String], u32> {
    let mut merged: FxHashMap<&[String], u32> = FxHashMap::default();
    for r in refs {
        for (g, c) in count_ngrams(r.tokens(), max_order) {
            let e = merged.entry(g).or_insert(0);
            *e = (*e).max(c);
        }
    }
    merged
}

/// Clips each hypothesis count to the largest count of that n-gram in any
/// single reference.
pub fn clip_counts(hyp: &NGramMultiset, refs: &[NGramMultiset]) -> Result<NGramMultiset> {
    if refs.is_empty() {
        return Err(Error::NoReference);
    }
    if let Some(r) = refs.iter().find(|r| r.max_order != hyp.max_order) {
        return Err(Error::config(format!(
            "reference max_order {} differs from hypothesis max_order {}",
            r.max_order, hyp.max_order
        )));
    }
    let mut out = NGramMultiset::new(hyp.max_order);
    for (g, c) in hyp.iter() {
        let ref_max = refs.iter().map(|r| r.get(g)).max().unwrap_or(0);
        out.set(g.clone(), c.min(ref_max));
    }
    Ok(out)
}
