use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigen-solver failed to converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("coin is not trace preserving: max|L*L + R*R - I| = {residual:.3e}")]
    NotTracePreserving { residual: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("auxiliary map has a nontrivial kernel but no invariant density could be extracted")]
    NoInvariantState,

    #[error("state is not invariant under the auxiliary map (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("vector is not a common eigenvector of L and R (residual {residual:.3e})")]
    NotCommonEigenvector { residual: f64 },

    #[error("mass reached the window boundary at site {site}")]
    WindowOverflow { site: i64 },

    #[error("absorption start site must be >= 1, got {start}")]
    InvalidStart { start: i64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
