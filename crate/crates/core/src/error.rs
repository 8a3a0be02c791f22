use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A linear system could not be solved reliably.
    #[error("singular system: {msg} (condition estimate {cond:.3e})")]
    Singular { msg: String, cond: f64 },

    /// A kernel evaluation failed; carries the Gram indices of the pair.
    #[error("kernel evaluation failed for pair ({i}, {j}): {source}")]
    KernelPair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    /// A manifest or data file was malformed; `row` is 1-based and counts the header.
    #[error("{path}: row {row}: {msg}")]
    Manifest {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    /// Underlying I/O failure, annotated with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A binary container had the wrong magic, size, or field values.
    #[error("bad container {path}: {msg}")]
    Container { path: PathBuf, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
