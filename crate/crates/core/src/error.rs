use thiserror::Error;

/// Errors raised by the cocycle layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("map at phase {phase} is not invertible (conorm {conorm:.3e}, norm {norm:.3e})")]
    Singular { phase: usize, conorm: f64, norm: f64 },

    #[error("map at phase {phase} has a non-finite entry")]
    NonFinite { phase: usize },

    #[error("log-scale {log_scale:.3} is outside the representable range")]
    Range { log_scale: f64 },

    #[error("numerical failure: {reason} (condition estimate {condition:.3e})")]
    Numerical { reason: String, condition: f64 },

    #[error("subspace is not invariant: residual {residual:.3e} at phase {phase}")]
    NotInvariant { phase: usize, residual: f64 },

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
