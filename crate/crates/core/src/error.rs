use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: non-numeric feature {column:?} value {value:?}")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: unmapped {role} value {value:?}")]
    UnmappedValue {
        row: usize,
        role: &'static str,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "Hessian factorization failed; the inner problem should be positive definite \
         with eigenvalue floor lambda_theta/n^2 = {floor:e}"
    )]
    HessianFactorization { floor: f64 },

    #[error("non-finite objective at outer iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error(
        "privacy budget infeasible: mechanism {mechanism} gets epsilon share {eps_share} > 1; \
         split the budget further"
    )]
    BudgetInfeasible { mechanism: String, eps_share: f64 },

    #[error("empty report")]
    EmptyReport,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
