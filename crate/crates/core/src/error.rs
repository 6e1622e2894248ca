//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by sampling, linear algebra, objectives, algorithms and
/// the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("matrix is not symmetric within tolerance {tol}: |H[{i}][{j}] - H[{j}][{i}]| = {diff}")]
    NotSymmetric {
        i: usize,
        j: usize,
        diff: f64,
        tol: f64,
    },

    #[error("dimension {d} exceeds eigensolver cap {cap}")]
    EigensolverCap { d: usize, cap: usize },

    #[error("eigensolver did not converge: {0}")]
    EigensolverFailure(String),

    #[error("not a saddle: smallest eigenvalue {0} is not negative")]
    NotASaddle(f64),

    #[error("objective does not expose the required oracle: {0}")]
    UnsupportedOracle(String),

    #[error("quadrature did not converge at [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("run failed for algorithm `{algorithm}` seed {seed}: {message}")]
    Run {
        algorithm: String,
        seed: u64,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }
}
