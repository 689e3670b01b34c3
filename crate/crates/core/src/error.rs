use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: need at least 2 subintervals, got {0}")]
    InvalidGrid(usize),

    #[error("dimension mismatch: expected {expected} samples, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("signal has zero range; relative noise level is undefined")]
    DegenerateRange,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid interval [{a}, {b}]: need 0 <= a < b <= 1")]
    InvalidInterval { a: f64, b: f64 },

    #[error("linear system is not positive definite at iteration {iteration} (alpha1={alpha1}, alpha2={alpha2})")]
    Singular {
        iteration: usize,
        alpha1: f64,
        alpha2: f64,
    },

    #[error(
        "discrepancy target {target:.6e} not bracketed: residual {low:.6e} at alpha={alpha_low:.3e}, {high:.6e} at alpha={alpha_high:.3e}"
    )]
    NoBracket {
        target: f64,
        alpha_low: f64,
        low: f64,
        alpha_high: f64,
        high: f64,
    },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("problem too large for exhaustive oracle: n={n}, limit {limit}")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
