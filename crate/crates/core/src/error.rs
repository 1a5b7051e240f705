//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A step cost was zero, negative or not finite.
    #[error("invalid step cost {value} at step {step}: costs must be finite and > 1e-12")]
    InvalidCost { step: usize, value: f64 },

    #[error("invalid path weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid feature order: {0}")]
    InvalidOrder(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("search budget exceeded: {required} evaluations needed, budget is {budget}; {hint}")]
    BudgetExceeded {
        required: u128,
        budget: u64,
        hint: &'static str,
    },

    #[error("bound not applicable: {0}")]
    InapplicableBound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("column `{0}` is constant and cannot be standardized")]
    ConstantColumn(String),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("at least {required} usable rows needed, found {found}")]
    TooFewRows { required: usize, found: usize },

    #[error("solver failed at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips `AtLambda` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLambda { source, .. } => source.root(),
            other => other,
        }
    }
}
