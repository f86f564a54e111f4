//! Multi-reference MT evaluation toolkit.
//!
//! The crate covers the whole evaluation pipeline used to study whether extra
//! (paraphrased) references make BLEU a better metric:
//!
//! - [`text`]: v13a tokenization and n-gram multisets with reference clipping.
//! - [`bleu`]: corpus and sentence BLEU over any number of references.
//! - [`trees`]: bracketed parse reading, depth pruning and tree kernels.
//! - [`diversity`]: lexical and syntactic diversity of paraphrase sets.
//! - [`mining`]: unrewarded n-gram constraints mined from system outputs.
//! - [`clustering`]: k-means cluster codes over sentence embeddings.
//! - [`stats`]: Pearson/Williams, daRR Kendall's tau, bootstrap and analyses.
//! - [`report`]: correlation reports rendered as TSV, JSON or markdown grids.
//!
//! Hot loops run on rayon when the `parallel` feature is enabled (default).
//! Every randomized routine is seeded explicitly and produces identical
//! results regardless of the number of worker threads.

pub mod bleu;
pub mod clustering;
pub mod diversity;
pub mod error;
pub mod io;
pub mod mining;
pub mod par;
pub mod report;
pub mod stats;
pub mod text;
pub mod trees;

pub use error::{Error, Result};
