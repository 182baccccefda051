use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("row {0} is identically zero")]
    ZeroRow(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("diagnostics cap exceeded: dimension {dim} is above the cap {cap}")]
    DiagnosticsCap { dim: usize, cap: usize },

    #[error(
        "pair table for {rows} rows exceeds the cap of {cap}; use TRKS, which samples pairs from a small random subset"
    )]
    PairCap { rows: usize, cap: usize },

    #[error("system rows span one direction: every candidate pair is parallel")]
    ParallelRows,

    #[error("all sampling weights are zero")]
    ZeroWeights,

    #[error("dense materialization of a {rows}x{cols} Kronecker operator is not allowed")]
    MaterializationGuard { rows: usize, cols: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inconsistent or ill-posed system: residual grew from {min:e} to {current:e}")]
    Diverged { min: f64, current: f64 },

    #[error("numerically singular Gram matrix")]
    Singular,

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
