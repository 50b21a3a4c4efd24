//! Error type shared by all modules of this crate.

use thiserror::Error;

/// Errors produced by construction, estimation, testing and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Two Hilbert points (or a point and a basis) do not live on the same
    /// grids / scalar dimensions.
    #[error("non-conformable operands: {0}")]
    Conformability(String),

    /// A precondition on the inputs is violated (empty sample, bad counts,
    /// parameters out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// All coordinates carry (numerically) zero variance, so max/min
    /// statistics are undefined.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A numerical routine failed beyond its tolerance (indefinite
    /// covariance, failed factorization, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Invalid user-supplied data values.
    #[error("validation error: {0}")]
    Validation(String),

    /// I/O failure, annotated with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file content, annotated with path and 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Failure inside a Monte Carlo replication, annotated with its position
    /// in the study.
    #[error("replicate {index} at r={r}: {source}")]
    Replicate {
        r: f64,
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
