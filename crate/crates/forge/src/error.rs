use cocycle_core::CoreError;
use cocycle_majorization::MajorizationError;
use cocycle_perturb::PerturbError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForgeError {
    /// Unreadable or malformed input, or an invalid request.
    #[error("input error: {0}")]
    Input(String),

    /// A verification check or an engine run failed.
    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Majorization(#[from] MajorizationError),

    #[error(transparent)]
    Perturb(#[from] PerturbError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ForgeError {
    /// Process exit status: 2 for input errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        let input = match self {
            ForgeError::Input(_) | ForgeError::Io(_) => true,
            ForgeError::Check(_) => false,
            ForgeError::Core(e) => {
                matches!(e, CoreError::Schema(_) | CoreError::Argument(_) | CoreError::Dimension { .. })
            }
            ForgeError::Majorization(e) => matches!(e, MajorizationError::Argument(_)),
            ForgeError::Perturb(e) => matches!(
                e,
                PerturbError::Argument(_) | PerturbError::Core(CoreError::Schema(_) | CoreError::Argument(_))
            ),
        };
        if input {
            2
        } else {
            1
        }
    }
}

pub type Result<T> = std::result::Result<T, ForgeError>;
