//! Cluster codes for code-conditioned paraphrasing: k-means over sentence
//! embeddings, nearest-centroid code assignment, and the `<cl_N>`
//! pseudotoken prefix that is added to training targets and stripped from
//! outputs.

use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Row-major `rows × dim` matrix of `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if rows.checked_mul(dim) != Some(data.len()) {
            return Err(Error::mismatch(format!("values of a {rows}x{dim} matrix"), rows * dim, data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "non-finite value at row {}, column {}",
                i / dim.max(1),
                i % dim.max(1)
            )));
        }
        Ok(EmbeddingMatrix { rows, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::mismatch("row dimension", dim, bad.len()));
        }
        EmbeddingMatrix::new(rows.len(), dim, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Binary layout: `rows` and `dim` as little-endian u64, then
    /// `rows · dim` little-endian f32 values, row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::Degenerate(format!("matrix file: {m}"));
        if bytes.len() < 16 {
            return Err(bad(format!("{} bytes is shorter than the 16-byte header", bytes.len())));
        }
        let rows = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")) as usize;
        let dim = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let expected = rows
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| bad(format!("header {rows}x{dim} overflows")))?;
        if bytes.len() - 16 != expected {
            return Err(bad(format!(
                "header says {rows}x{dim} ({expected} bytes of data) but {} bytes follow",
                bytes.len() - 16
            )));
        }
        let data = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        EmbeddingMatrix::new(rows, dim, data)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centroids: EmbeddingMatrix,
    pub k: usize,
    pub seed: u64,
    pub iterations_run: usize,
}

/// JSON sidecar stored next to the centroid matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn info(&self) -> ModelInfo {
        ModelInfo {
            k: self.k,
            seed: self.seed,
            iterations: self.iterations_run,
        }
    }

    pub fn from_parts(centroids: EmbeddingMatrix, info: ModelInfo) -> Result<Self> {
        if centroids.rows() != info.k {
            return Err(Error::mismatch("centroid rows", info.k, centroids.rows()));
        }
        Ok(ClusterModel {
            centroids,
            k: info.k,
            seed: info.seed,
            iterations_run: info.iterations,
        })
    }
}

fn sq_dist(x: &[f32], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(&a, &b)| {
            let d = f64::from(a) - b;
            d * d
        })
        .sum()
}

fn nearest(x: &[f32], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn kmeans_pp_init(x: &EmbeddingMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = x.rows();
    let dim = x.dim();
    let mut chosen = vec![false; n];
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.extend(x.row(first).iter().map(|&v| f64::from(v)));
    let mut d2 = par::map_range(n, |i| sq_dist(x.row(i), &centroids[..dim]));
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` a hair below `target`.
            pick.or_else(|| d2.iter().rposition(|&d| d > 0.0)).expect("positive total")
        } else {
            chosen.iter().position(|&c| !c).expect("n >= k")
        };
        chosen[pick] = true;
        let start = centroids.len();
        centroids.extend(x.row(pick).iter().map(|&v| f64::from(v)));
        let new_c = &centroids[start..start + dim];
        let updated = par::map_range(n, |i| d2[i].min(sq_dist(x.row(i), new_c)));
        d2 = updated;
        debug_assert_eq!(centroids.len(), (c + 1) * dim);
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding. Also returns the within-cluster
/// sum of squares after each iteration.
pub fn kmeans_traced(x: &EmbeddingMatrix, k: usize, max_iters: usize, seed: u64) -> Result<(ClusterModel, Vec<f64>)> {
    let n = x.rows();
    let dim = x.dim();
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if n < k {
        return Err(Error::Degenerate(format!("{n} points cannot form {k} clusters")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(x, k, &mut rng);
    let mut labels: Vec<usize> = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < max_iters {
        let assigned = par::map_range(n, |i| nearest(x.row(i), &centroids, dim).0);
        iterations += 1;
        if assigned == labels {
            break;
        }
        labels = assigned;

        // Index-ordered accumulation keeps results independent of threads.
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, &v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(x.row(i)) {
                *s += f64::from(v);
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let inv = counts[j] as f64;
                for (c, s) in centroids[j * dim..(j + 1) * dim].iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                    *c = s / inv;
                }
            }
        }
        let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
        if !empty.is_empty() {
            let mut dist = par::map_range(n, |i| sq_dist(x.row(i), &centroids[labels[i] * dim..(labels[i] + 1) * dim]));
            for j in empty {
                let far = dist
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &d)| if d > dist[best] { i } else { best });
                log::debug!("reseeding empty cluster {j} at point {far}");
                for (c, &v) in centroids[j * dim..(j + 1) * dim].iter_mut().zip(x.row(far)) {
                    *c = f64::from(v);
                }
                dist[far] = -1.0;
            }
        }
        let sse: f64 = par::map_range(n, |i| sq_dist(x.row(i), &centroids[labels[i] * dim..(labels[i] + 1) * dim]))
            .iter()
            .sum();
        trace.push(sse);
    }

    let data = centroids.iter().map(|&v| v as f32).collect();
    let model = ClusterModel {
        centroids: EmbeddingMatrix::new(k, dim, data)?,
        k,
        seed,
        iterations_run: iterations,
    };
    Ok((model, trace))
}

pub fn kmeans(x: &EmbeddingMatrix, k: usize, max_iters: usize, seed: u64) -> Result<ClusterModel> {
    kmeans_traced(x, k, max_iters, seed).map(|(m, _)| m)
}

/// Nearest centroid (squared Euclidean) per row; ties go to the lower index.
pub fn assign_codes(x: &EmbeddingMatrix, model: &ClusterModel) -> Result<Vec<usize>> {
    let dim = model.centroids.dim();
    if x.dim() != dim {
        return Err(Error::mismatch("embedding dimension", dim, x.dim()));
    }
    let centroids: Vec<f64> = model.centroids.as_slice().iter().map(|&v| f64::from(v)).collect();
    Ok(par::map_range(x.rows(), |i| nearest(x.row(i), &centroids, dim).0))
}

/// Within-cluster sum of squared distances for a given assignment.
pub fn total_sse(x: &EmbeddingMatrix, model: &ClusterModel, codes: &[usize]) -> f64 {
    let dim = model.centroids.dim();
    let centroids: Vec<f64> = model.centroids.as_slice().iter().map(|&v| f64::from(v)).collect();
    codes
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(x.row(i), &centroids[c * dim..(c + 1) * dim]))
        .sum()
}

/// The pseudotoken for code `n`.
pub fn code_token(code: usize) -> String {
    format!("<cl_{code}>")
}

/// Prefixes each sentence with its code pseudotoken and a space.
pub fn prefix_codes(sentences: &[String], codes: &[usize], k: usize) -> Result<Vec<String>> {
    if sentences.len() != codes.len() {
        return Err(Error::mismatch("codes", sentences.len(), codes.len()));
    }
    sentences
        .iter()
        .zip(codes)
        .enumerate()
        .map(|(i, (s, &c))| {
            if c >= k {
                return Err(Error::Degenerate(format!("line {}: code {c} outside [0, {k})", i + 1)));
            }
            if s.trim().is_empty() {
                log::warn!("line {}: prefixing an empty sentence", i + 1);
            }
            Ok(format!("{} {s}", code_token(c)))
        })
        .collect()
}

static CODE_PREFIX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^<cl_([0-9]+)> ?").expect("valid regex"));

/// Removes one leading code pseudotoken (and the space after it) per line.
pub fn strip_codes(outputs: &[String]) -> (Vec<String>, Vec<Option<usize>>) {
    outputs.iter().map(|line| strip_code(line)).unzip()
}

pub fn strip_code(line: &str) -> (String, Option<usize>) {
    if let Some(m) = CODE_PREFIX.captures(line) {
        if let Ok(code) = m[1].parse::<usize>() {
            let end = m.get(0).expect("whole match").end();
            return (line[end..].to_string(), Some(code));
        }
    }
    (line.to_string(), None)
}
