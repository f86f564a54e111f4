//! Constituency trees: bracketed reading, depth pruning, distinct-shape
//! statistics and the subset-tree kernel.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rooted, ordered, labelled tree. Words are childless nodes flagged as
/// lexical leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub is_lexical_leaf: bool,
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label: label.into(),
            children,
            is_lexical_leaf: false,
        }
    }

    pub fn leaf(word: impl Into<String>) -> Self {
        ParseTree {
            label: word.into(),
            children: Vec::new(),
            is_lexical_leaf: true,
        }
    }

    pub fn is_childless(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of levels; a single node has height 1.
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(ParseTree::height).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseTree::node_count).sum::<usize>()
    }

    /// Words at the leaves, left to right.
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_lexical_leaf {
            out.push(&self.label);
        }
        for c in &self.children {
            c.collect_words(out);
        }
    }

    /// Copy with every lexical leaf removed.
    pub fn strip_leaves(&self) -> ParseTree {
        ParseTree {
            label: self.label.clone(),
            children: self
                .children
                .iter()
                .filter(|c| !c.is_lexical_leaf)
                .map(ParseTree::strip_leaves)
                .collect(),
            is_lexical_leaf: self.is_lexical_leaf,
        }
    }

    /// Minimal single-space bracketed form, e.g. `(S (NP (DT the)) (VP))`.
    /// Used as the canonical key for deduplication.
    pub fn to_bracketed(&self) -> String {
        let mut s = String::new();
        self.write_bracketed(&mut s);
        s
    }

    fn write_bracketed(&self, out: &mut String) {
        if self.is_lexical_leaf {
            out.push_str(&self.label);
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        for c in &self.children {
            out.push(' ');
            c.write_bracketed(out);
        }
        out.push(')');
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracketed())
    }
}

impl FromStr for ParseTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_ptb(s)
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn is_atom_char(c: char) -> bool {
    !c.is_whitespace() && c != '(' && c != ')'
}

/// Reads one tree in bracketed (PTB) notation. Offsets in errors count
/// characters from the start of `text`.
pub fn parse_ptb(text: &str) -> Result<ParseTree> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let read_atom = |pos: &mut usize| -> String {
        let start = *pos;
        while *pos < chars.len() && is_atom_char(chars[*pos]) {
            *pos += 1;
        }
        chars[start..*pos].iter().collect()
    };

    skip_ws(&mut pos);
    if pos >= chars.len() {
        return Err(parse_err(pos, "expected '(' but found end of input"));
    }
    if chars[pos] != '(' {
        return Err(parse_err(pos, format!("expected '(' but found {:?}", chars[pos])));
    }

    let mut stack: Vec<ParseTree> = Vec::new();
    loop {
        skip_ws(&mut pos);
        if pos >= chars.len() {
            return Err(parse_err(pos, "unbalanced parentheses: unexpected end of input"));
        }
        match chars[pos] {
            '(' => {
                pos += 1;
                skip_ws(&mut pos);
                let label = read_atom(&mut pos);
                if label.is_empty() {
                    return Err(parse_err(pos, "empty label"));
                }
                stack.push(ParseTree::node(label, Vec::new()));
            }
            ')' => {
                pos += 1;
                let done = stack.pop().ok_or_else(|| parse_err(pos - 1, "unmatched ')'"))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(done),
                    None => {
                        skip_ws(&mut pos);
                        if pos < chars.len() {
                            return Err(parse_err(pos, "trailing characters after tree"));
                        }
                        return Ok(done);
                    }
                }
            }
            _ => {
                let word = read_atom(&mut pos);
                match stack.last_mut() {
                    Some(parent) => parent.children.push(ParseTree::leaf(word)),
                    None => return Err(parse_err(pos, "atom outside of brackets")),
                }
            }
        }
    }
}

/// Removes every node deeper than `depth` (the root is at depth 1). When
/// `keep_leaves` is false, lexical leaves are stripped first.
pub fn prune_depth(tree: &ParseTree, depth: usize, keep_leaves: bool) -> ParseTree {
    fn go(t: &ParseTree, remaining: usize, keep_leaves: bool) -> ParseTree {
        let children = if remaining <= 1 {
            Vec::new()
        } else {
            t.children
                .iter()
                .filter(|c| keep_leaves || !c.is_lexical_leaf)
                .map(|c| go(c, remaining - 1, keep_leaves))
                .collect()
        };
        ParseTree {
            label: t.label.clone(),
            children,
            is_lexical_leaf: t.is_lexical_leaf,
        }
    }
    go(tree, depth.max(1), keep_leaves)
}

/// A pruning depth; `None` keeps the whole tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Depth(pub Option<usize>);

impl Depth {
    pub const UNLIMITED: Depth = Depth(None);

    fn limit(self) -> usize {
        self.0.unwrap_or(usize::MAX)
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞" | "full") {
            return Ok(Depth::UNLIMITED);
        }
        match s.parse::<usize>() {
            Ok(d) if d >= 1 => Ok(Depth(Some(d))),
            _ => Err(Error::config(format!("invalid depth {s:?}: expected an integer >= 1 or 'inf'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub depth: Depth,
    pub count_no_leaves: usize,
    pub count_with_leaves: usize,
    /// Distinct leafless shapes over the number of trees read.
    pub type_token_ratio: f64,
}

/// Counts distinct pruned shapes (by canonical serialization) at each depth,
/// with and without lexical leaves.
pub fn distinct_tree_stats<I>(trees: I, depths: &[Depth]) -> Vec<DepthStats>
where
    I: IntoIterator<Item = ParseTree>,
{
    let mut no_leaves: Vec<HashSet<String>> = vec![HashSet::new(); depths.len()];
    let mut with_leaves: Vec<HashSet<String>> = vec![HashSet::new(); depths.len()];
    let mut total = 0usize;
    for tree in trees {
        total += 1;
        for (k, d) in depths.iter().enumerate() {
            no_leaves[k].insert(prune_depth(&tree, d.limit(), false).to_bracketed());
            with_leaves[k].insert(prune_depth(&tree, d.limit(), true).to_bracketed());
        }
    }
    depths
        .iter()
        .enumerate()
        .map(|(k, &depth)| DepthStats {
            depth,
            count_no_leaves: no_leaves[k].len(),
            count_with_leaves: with_leaves[k].len(),
            type_token_ratio: if total == 0 {
                0.0
            } else {
                no_leaves[k].len() as f64 / total as f64
            },
        })
        .collect()
}

/// Parameters of the tree kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Decay factor in `(0, 1]`.
    pub lambda: f64,
    /// 0 restricts matches to complete subtrees, 1 admits all subset trees.
    pub sigma: u8,
    /// Whether lexical leaves take part in matching.
    pub include_leaves: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            lambda: 0.5,
            sigma: 0,
            include_leaves: false,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::config(format!("lambda {} outside (0, 1]", self.lambda)));
        }
        if self.sigma > 1 {
            return Err(Error::config(format!("sigma {} must be 0 or 1", self.sigma)));
        }
        Ok(())
    }
}

// Post-order arena of a tree with interned productions.
struct FlatTree {
    production: Vec<u32>,
    children: Vec<Vec<u32>>,
}

#[derive(Default)]
struct Interner<'a> {
    labels: HashMap<(&'a str, bool), u32>,
    productions: HashMap<(u32, Vec<u32>), u32>,
}

impl<'a> Interner<'a> {
    fn label(&mut self, t: &'a ParseTree) -> u32 {
        let next = self.labels.len() as u32;
        *self.labels.entry((t.label.as_str(), t.is_lexical_leaf)).or_insert(next)
    }

    fn flatten(&mut self, t: &'a ParseTree, include_leaves: bool) -> FlatTree {
        let mut flat = FlatTree {
            production: Vec::new(),
            children: Vec::new(),
        };
        self.push(t, include_leaves, &mut flat);
        flat
    }

    fn push(&mut self, t: &'a ParseTree, include_leaves: bool, flat: &mut FlatTree) -> u32 {
        let kept: Vec<&ParseTree> = t
            .children
            .iter()
            .filter(|c| include_leaves || !c.is_lexical_leaf)
            .collect();
        let child_ids: Vec<u32> = kept.iter().map(|c| self.push(c, include_leaves, flat)).collect();
        let child_labels: Vec<u32> = kept.iter().map(|c| self.label(c)).collect();
        let own = self.label(t);
        let next = self.productions.len() as u32;
        let prod = *self.productions.entry((own, child_labels)).or_insert(next);
        flat.production.push(prod);
        flat.children.push(child_ids);
        (flat.production.len() - 1) as u32
    }
}

/// Subset-tree kernel `K(t1, t2) = Σ Δ(n1, n2)` over all node pairs.
///
/// Childless nodes match when their labels are equal (`Δ = λ`); internal
/// nodes match when their productions are equal
/// (`Δ = λ · Π_j (σ + Δ(c1_j, c2_j))`). Lexical leaves are ignored unless
/// `cfg.include_leaves` is set.
pub fn tree_kernel(t1: &ParseTree, t2: &ParseTree, cfg: &KernelConfig) -> f64 {
    let mut interner = Interner::default();
    let a = interner.flatten(t1, cfg.include_leaves);
    let b = interner.flatten(t2, cfg.include_leaves);
    kernel_flat(&a, &b, cfg)
}

fn kernel_flat(a: &FlatTree, b: &FlatTree, cfg: &KernelConfig) -> f64 {
    let sigma = f64::from(cfg.sigma);
    let mut by_prod: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, &p) in b.production.iter().enumerate() {
        by_prod.entry(p).or_default().push(j);
    }
    let nb = b.production.len();
    let mut delta = vec![0.0f64; a.production.len() * nb];
    let mut total = 0.0;
    // Post-order guarantees children are computed before their parents.
    for (i, p) in a.production.iter().enumerate() {
        let Some(matches) = by_prod.get(p) else { continue };
        for &j in matches {
            let mut d = cfg.lambda;
            for (&ci, &cj) in a.children[i].iter().zip(&b.children[j]) {
                d *= sigma + delta[ci as usize * nb + cj as usize];
            }
            delta[i * nb + j] = d;
            total += d;
        }
    }
    total
}

/// `K(t1, t2) / sqrt(K(t1, t1) · K(t2, t2))`, in `[0, 1]`.
pub fn normalized_tree_similarity(t1: &ParseTree, t2: &ParseTree, cfg: &KernelConfig) -> Result<f64> {
    cfg.validate()?;
    let mut interner = Interner::default();
    let a = interner.flatten(t1, cfg.include_leaves);
    let b = interner.flatten(t2, cfg.include_leaves);
    let kaa = kernel_flat(&a, &a, cfg);
    let kbb = kernel_flat(&b, &b, cfg);
    if kaa <= 0.0 || kbb <= 0.0 {
        return Err(Error::Degenerate("tree with zero self-kernel".into()));
    }
    if std::ptr::eq(t1, t2) {
        return Ok(1.0);
    }
    let kab = kernel_flat(&a, &b, cfg);
    Ok((kab / (kaa * kbb).sqrt()).clamp(0.0, 1.0))
}
