use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error(
        "walk parameter t={t} is unstable for spectral radius {spectral_radius} \
         (t*rho = {product:.6} >= 1); use a smaller t"
    )]
    UnstableWalk { t: f64, spectral_radius: f64, product: f64 },

    #[error("walk matrix solve is ill-conditioned (residual {residual:e} > {limit:e})")]
    IllConditioned { residual: f64, limit: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("empty training set: {0}")]
    EmptyTrainingSet(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}: file not found")]
    MissingFile { path: PathBuf },

    #[error("{path}: empty input")]
    EmptyFile { path: PathBuf },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: image error: {message}")]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(left: impl ToString, right: impl ToString) -> Self {
        Error::DimensionMismatch {
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnstableWalk { .. } | Error::IllConditioned { .. } | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
