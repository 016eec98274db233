use fraxion::FraxionError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<FraxionError> for CliError {
    fn from(e: FraxionError) -> Self {
        match e {
            FraxionError::Validation(m) => CliError::Validation(m),
            FraxionError::Infeasible { .. } | FraxionError::InfeasibleN { .. } => {
                CliError::Infeasible(e.to_string())
            }
            FraxionError::CapExceeded { .. }
            | FraxionError::TooLarge { .. }
            | FraxionError::NoFeasibleGridPoint { .. } => CliError::Validation(e.to_string()),
            // A broken case analysis is a solver bug, same class as a failed check.
            FraxionError::Internal(_) => CliError::Verification(e.to_string()),
        }
    }
}
