use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ConeTestError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ConeTestError {
    #[error("constraint row {row} is all zeros")]
    ZeroRow { row: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("constraint matrix does not match the {0} pattern")]
    FamilyMismatch(&'static str),

    #[error("weight {index} must be positive and finite, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("covariance matrix is not symmetric positive definite")]
    SingularCovariance,

    #[error("active-set solver did not converge within {0} iterations")]
    MaxIterationsExceeded(usize),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("adjusted level {factor} * {alpha} is not below 1")]
    AlphaOverflow { alpha: f64, factor: f64 },

    #[error("variance estimate must be positive, got {0}")]
    NonPositiveVarianceEstimate(f64),

    #[error("no exact level bound is available for {0} cones")]
    UnsupportedFamily(&'static str),

    #[error("mean vector lies outside the null hypothesis")]
    MuOutsideNull,

    #[error("invalid chi-bar mixture weights: {0}")]
    InvalidWeights(String),

    #[error("simulation size {found} is below the minimum of {minimum}")]
    TooFewSimulations { found: usize, minimum: usize },

    #[error("{}:{line}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ConeTestError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        ConeTestError::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    /// Attach a file path to a parse error; other variants pass through.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            ConeTestError::Parse { line, message, .. } => ConeTestError::Parse {
                path: Some(p.into()),
                line,
                message,
            },
            other => other,
        }
    }
}
