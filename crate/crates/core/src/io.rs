//! File formats: line-aligned text, TSV score tables, parse files,
//! embedding matrices and cluster models. Every writer is atomic.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::clustering::{ClusterModel, EmbeddingMatrix, ModelInfo};
use crate::error::{Error, Result};
use crate::stats::SegmentScores;
use crate::text::{tokenize_v13a, Segment};
use crate::trees::{parse_ptb, ParseTree};

/// Reads a UTF-8 file as lines, without line terminators.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect())
}

/// One segment per line, v13a-tokenized unless `pretokenized`.
pub fn read_segments(path: impl AsRef<Path>, pretokenized: bool) -> Result<Vec<Segment>> {
    Ok(read_lines(path)?
        .iter()
        .map(|l| {
            if pretokenized {
                Segment::from_tokenized(l)
            } else {
                tokenize_v13a(l)
            }
        })
        .collect())
}

/// Several line-aligned reference files, transposed to one reference list
/// per segment.
pub fn read_reference_sets(paths: &[PathBuf], pretokenized: bool) -> Result<Vec<Vec<Segment>>> {
    if paths.is_empty() {
        return Err(Error::NoReference);
    }
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        files.push(read_segments(p, pretokenized)?);
    }
    let n = files[0].len();
    for (p, f) in paths.iter().zip(&files).skip(1) {
        if f.len() != n {
            return Err(Error::Format {
                path: p.clone(),
                message: format!("{} lines, expected {n}", f.len()),
            });
        }
    }
    let mut out: Vec<Vec<Segment>> = (0..n).map(|_| Vec::with_capacity(files.len())).collect();
    for f in files {
        for (i, s) in f.into_iter().enumerate() {
            out[i].push(s);
        }
    }
    Ok(out)
}

/// Every regular file in `dir`, keyed by file stem (`<system>.txt`), read
/// as segments.
pub fn read_system_dir(dir: impl AsRef<Path>, pretokenized: bool) -> Result<BTreeMap<String, Vec<Segment>>> {
    let dir = dir.as_ref();
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let file_name = entry.file_name().to_string_lossy().into_owned();
        if file_name.starts_with('.') {
            continue;
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(file_name);
        if out.insert(name.clone(), read_segments(&path, pretokenized)?).is_some() {
            return Err(Error::Format {
                path: dir.to_path_buf(),
                message: format!("two files for system {name}"),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            message: "no system output files".into(),
        });
    }
    Ok(out)
}

/// One bracketed tree per line.
pub fn read_parses(path: impl AsRef<Path>) -> Result<Vec<ParseTree>> {
    let path = path.as_ref();
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            parse_ptb(l).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

fn tsv_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    Ok(read_lines(path)?
        .into_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(|f| f.trim().to_string()).collect()))
        .collect())
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: invalid {what} {field:?}"),
    })
}

fn finite(path: &Path, line: usize, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("line {line}: non-finite score"),
        })
    }
}

fn averaged<K: Ord>(sums: BTreeMap<K, (f64, usize)>) -> impl Iterator<Item = (K, f64)> {
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64))
}

/// `system<TAB>score`. Repeated systems are averaged.
pub fn read_system_scores(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (line, f) in tsv_rows(path)? {
        if f.len() != 2 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line}: expected 2 columns, got {}", f.len()),
            });
        }
        let v = finite(path, line, parse_field(path, line, &f[1], "score")?)?;
        let e = sums.entry(f[0].clone()).or_default();
        e.0 += v;
        e.1 += 1;
    }
    Ok(averaged(sums).collect())
}

/// `system<TAB>segment<TAB>score`. Repeated judgments are averaged.
pub fn read_segment_scores(path: impl AsRef<Path>) -> Result<SegmentScores> {
    let path = path.as_ref();
    let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for (line, f) in tsv_rows(path)? {
        if f.len() != 3 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line}: expected 3 columns, got {}", f.len()),
            });
        }
        let seg = parse_field(path, line, &f[1], "segment id")?;
        let v = finite(path, line, parse_field(path, line, &f[2], "score")?)?;
        let e = sums.entry((f[0].clone(), seg)).or_default();
        e.0 += v;
        e.1 += 1;
    }
    Ok(averaged(sums).collect())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Lines joined with `\n`, with a trailing newline when non-empty.
pub fn write_lines<S: AsRef<str>>(path: impl AsRef<Path>, lines: &[S]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(l.as_ref());
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingMatrix::from_bytes(&bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_matrix(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<()> {
    write_atomic(path, &m.to_bytes())
}

/// `<model>.json` next to the centroid matrix.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_model(path: impl AsRef<Path>, model: &ClusterModel) -> Result<()> {
    let path = path.as_ref();
    write_matrix(path, &model.centroids)?;
    write_json(sidecar_path(path), &model.info())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ClusterModel> {
    let path = path.as_ref();
    let centroids = read_matrix(path)?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let info: ModelInfo = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: side.clone(),
        message: e.to_string(),
    })?;
    ClusterModel::from_parts(centroids, info)
}
