use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, Subcommand};
use refcover::clustering::{assign_codes, kmeans_traced, prefix_codes, strip_codes, total_sse};
use refcover::io::{read_lines, read_matrix, read_model, write_model};

use crate::config::{required, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_inputs, emit};

#[derive(Debug, Subcommand)]
pub enum ClusterCommand {
    /// Fit k-means centroids to an embedding matrix.
    Fit(FitArgs),
    /// Nearest-centroid code for every embedding row.
    Assign(AssignArgs),
    /// Prefix each sentence with its `<cl_N>` pseudotoken.
    Prefix(PrefixArgs),
    /// Remove a leading `<cl_N>` pseudotoken from each line.
    Strip(StripArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Binary embedding matrix (u64 rows, u64 dim, then f32 row-major).
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,

    #[arg(long)]
    k: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    max_iters: Option<usize>,

    /// Centroid matrix; a `.json` sidecar is written next to it.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,

    /// One code per line (default: standard output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrefixArgs {
    #[arg(long, value_name = "FILE")]
    sentences: PathBuf,

    /// One integer code per line, aligned with the sentences.
    #[arg(long, value_name = "FILE")]
    codes: PathBuf,

    /// Number of clusters; codes must be below it.
    #[arg(long)]
    k: Option<usize>,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StripArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Also write the removed codes, `-` where a line had none.
    #[arg(long, value_name = "FILE")]
    codes_out: Option<PathBuf>,
}

fn lines_text<S: AsRef<str>>(lines: &[S]) -> String {
    let mut text = String::new();
    for l in lines {
        text.push_str(l.as_ref());
        text.push('\n');
    }
    text
}

pub fn run(cmd: ClusterCommand, cfg: &RunConfig) -> CmdResult {
    match cmd {
        ClusterCommand::Fit(a) => {
            let emb = required(a.embeddings, &cfg.paths.embeddings, "embeddings")?;
            let k = a.k.or(cfg.cluster.k).unwrap_or(256);
            let max_iters = a.max_iters.or(cfg.cluster.max_iters).unwrap_or(100);
            let seed = cfg.seed(a.seed);
            check_inputs([emb.as_path()])?;
            let x = read_matrix(&emb)?;
            log::info!("fitting k={k} on {} x {} embeddings (seed {seed})", x.rows(), x.dim());
            let (model, trace) = kmeans_traced(&x, k, max_iters, seed)?;
            log::info!(
                "{} iterations, final SSE {}",
                model.iterations_run,
                trace.last().copied().unwrap_or(f64::NAN)
            );
            write_model(&a.out, &model)?;
            log::info!("wrote {}", a.out.display());
            Ok(())
        }
        ClusterCommand::Assign(a) => {
            let emb = required(a.embeddings, &cfg.paths.embeddings, "embeddings")?;
            let model_path = required(a.model, &cfg.paths.model, "model")?;
            check_inputs([emb.as_path(), model_path.as_path()])?;
            let x = read_matrix(&emb)?;
            let model = read_model(&model_path)?;
            let codes = assign_codes(&x, &model)?;
            log::info!("assigned {} rows, SSE {}", codes.len(), total_sse(&x, &model, &codes));
            let lines: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
            emit(a.out.as_deref(), &lines_text(&lines))
        }
        ClusterCommand::Prefix(a) => {
            check_inputs([a.sentences.as_path(), a.codes.as_path()])?;
            let sentences = read_lines(&a.sentences)?;
            let codes = read_lines(&a.codes)?
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    l.trim()
                        .parse::<usize>()
                        .map_err(|_| anyhow!("{}: line {}: invalid code {l:?}", a.codes.display(), i + 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let k = a.k.or(cfg.cluster.k).unwrap_or(256);
            let out = prefix_codes(&sentences, &codes, k).map_err(|e| match e {
                refcover::Error::InvalidConfig(m) => Failure::Data(anyhow!(m)),
                other => other.into(),
            })?;
            emit(a.out.as_deref(), &lines_text(&out))
        }
        ClusterCommand::Strip(a) => {
            check_inputs([a.input.as_path()])?;
            let (lines, codes) = strip_codes(&read_lines(&a.input)?);
            let stripped = codes.iter().filter(|c| c.is_some()).count();
            log::info!("stripped codes from {stripped} of {} lines", lines.len());
            if let Some(path) = &a.codes_out {
                let shown: Vec<String> = codes
                    .iter()
                    .map(|c| c.map_or_else(|| "-".to_string(), |c| c.to_string()))
                    .collect();
                emit(Some(path), &lines_text(&shown))?;
            }
            emit(a.out.as_deref(), &lines_text(&lines))
        }
    }
}
