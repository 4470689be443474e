//! Error type shared across the pipeline.
//!
//! Variants are grouped by failure class so front ends can map them to
//! stable exit codes: configuration/usage problems, data problems, and
//! numeric failures.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or arguments (bad hyperparameters, empty
    /// grids, inconsistent plan ranges, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// A line of an input file failed to parse.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Numeric failure (non-finite weights, degenerate normalizers, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Not enough history to build the requested regression design.
    #[error("insufficient history: earliest feasible target index is {earliest_feasible}, but only indices up to {available} are available")]
    InsufficientHistory {
        earliest_feasible: usize,
        available: usize,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit-code class: 1 usage/config, 2 data, 3 numeric.
    pub fn exit_class(&self) -> u8 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Parse { .. } | Error::Io { .. } => 2,
            Error::Numeric(_) | Error::InsufficientHistory { .. } => 3,
        }
    }
}
