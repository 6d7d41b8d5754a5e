use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajorizationError {
    #[error("argument error: {0}")]
    Argument(String),

    /// The pair is not ordered as required, or the endpoints differ.
    #[error("order error: {0}")]
    Order(String),

    #[error("index error: {0}")]
    Index(String),

    /// A certified bound failed on the computed data.
    #[error("bound violated: {0}")]
    Bound(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for MajorizationError {
    fn from(e: csv::Error) -> Self {
        MajorizationError::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MajorizationError>;
