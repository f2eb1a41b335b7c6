//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error for key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("failed to parse config document: {0}")]
    ConfigSyntax(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid IDX file {path}: {reason}")]
    IdxFormat { path: String, reason: String },

    #[error("dataset error: {0}")]
    Data(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("model shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("channel magnitude must be positive, got {0}")]
    NonPositiveChannel(f64),

    #[error("unknown client id {0}")]
    UnknownClient(usize),

    #[error("cannot sample {k} clients from {n}")]
    SampleSize { k: usize, n: usize },

    #[error("selection distribution has {support} positive entries, need {k}")]
    InsufficientSupport { support: usize, k: usize },

    #[error("degenerate selection distribution: all weights are zero")]
    DegenerateDistribution,
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
