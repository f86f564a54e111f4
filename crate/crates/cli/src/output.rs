use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use crate::failure::Failure;

/// Fails with a data error naming the first input that does not exist.
pub fn check_inputs<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<(), Failure> {
    for p in paths {
        if !p.exists() {
            return Err(Failure::Data(anyhow!("{}: no such file or directory", p.display())));
        }
    }
    Ok(())
}

/// Atomically writes `text` to `out`, or prints it when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            refcover::io::write_atomic(path, text.as_bytes())?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .context("writing to standard output")?;
        }
    }
    Ok(())
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    emit(out, &text)
}

/// Whether tabular output should be JSON rather than TSV.
pub fn wants_json(out: Option<&Path>) -> bool {
    out.and_then(Path::extension).is_some_and(|e| e == "json")
}

/// `dir/stem{suffix}.ext` for an output path `dir/stem.ext`.
pub fn sibling(path: &Path, suffix: &str, ext: Option<&str>) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = ext
        .map(str::to_string)
        .or_else(|| path.extension().map(|e| e.to_string_lossy().into_owned()));
    let name = match ext {
        Some(e) => format!("{stem}{suffix}.{e}"),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}
