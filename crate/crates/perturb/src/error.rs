use cocycle_core::CoreError;
use cocycle_majorization::MajorizationError;
use thiserror::Error;

use crate::path::PerturbationPath;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Majorization(#[from] MajorizationError),

    #[error("argument error: {0}")]
    Argument(String),

    /// The input does not meet the operation's precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The construction ran out of budget; `partial` holds the path built so far.
    #[error("capability exhausted: {reason} (residual {residual:.3e})")]
    Capability { reason: String, residual: f64, partial: Option<Box<PerturbationPath>> },

    #[error("range error: {0}")]
    Range(String),

    #[error("order violation: {0}")]
    Order(String),

    #[error("pinned coordinate {index} violated: target {target}, current {current}")]
    Pinned { index: usize, target: f64, current: f64 },

    #[error("index {index} is {ell}-dominated (worst ratio {ratio:.3e})")]
    Dominated { index: usize, ell: usize, ratio: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for PerturbError {
    fn from(e: csv::Error) -> Self {
        PerturbError::Csv(e.to_string())
    }
}

impl PerturbError {
    pub(crate) fn capability(reason: impl Into<String>, residual: f64, partial: Option<PerturbationPath>) -> Self {
        PerturbError::Capability { reason: reason.into(), residual, partial: partial.map(Box::new) }
    }
}

pub type Result<T> = std::result::Result<T, PerturbError>;
