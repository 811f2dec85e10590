use std::path::PathBuf;

use crate::types::{FeasibilityReport, IterationTrace};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for vector of length {len}")]
    Index { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A rule or function produced a value that cannot be used (NaN, infinite).
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    /// Evaluation of a candidate function failed at a specific input.
    #[error("evaluation failed at {input:?}: {reason}")]
    Evaluation { input: Vec<f64>, reason: String },

    #[error("system is not certified feasible (lambda = {})", .0.lambda)]
    Infeasible(Box<FeasibilityReport>),

    #[error("singular system: {0}")]
    Singular(String),

    #[error(
        "no convergence after {} iterations (last delta {:e})",
        .trace.iterations_used,
        .trace.deltas.last().copied().unwrap_or(f64::NAN)
    )]
    NonConvergence { trace: Box<IterationTrace> },

    #[error("grid of dimension {n} exceeds the limit of {limit}; pass an explicit override")]
    ResourceGuard { n: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
