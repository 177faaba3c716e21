use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot ingest {}: {reason}", path.display())]
    Ingestion { path: PathBuf, reason: String },

    #[error("{}: unsupported bit depth ({bits} bits per sample), only 8-bit images are accepted", path.display())]
    UnsupportedDepth { path: PathBuf, bits: u32 },

    #[error("no images found under {}", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("model fit failed: {0}")]
    ModelFit(String),

    #[error("class {class:?} has {count} samples, fewer than the {folds} folds requested")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
