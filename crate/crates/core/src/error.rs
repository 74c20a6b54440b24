use thiserror::Error;

/// Errors produced by pattern construction, scoring, retrieval and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pixel value {0} outside [0, 1]")]
    PixelOutOfRange(f64),

    #[error("class count {0} outside [1, 10]")]
    ClassCountOutOfRange(usize),

    #[error("exemplars per digit must be positive")]
    EmptyExemplarCount,

    #[error("pattern size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("memory bank must hold at least one memory")]
    EmptyBank,

    #[error("beta must be positive, got {0}")]
    InvalidBeta(f64),

    #[error("noise variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid neighbor-op weights: {0}")]
    InvalidOpWeights(String),

    #[error("invalid encoding scheme: {0}")]
    InvalidScheme(String),

    #[error("regime {0:?} not valid for this experiment")]
    InvalidRegime(crate::experiments::Regime),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
