use thiserror::Error;

/// Run failures, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(capwave::Error),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<capwave::Error> for CliError {
    /// Errors that a different configuration would avoid count as configuration errors.
    fn from(e: capwave::Error) -> Self {
        use capwave::Error::*;
        match e {
            GridSize(_) | GridLength(_) | LengthMismatch { .. } | GridMismatch | InvalidInput(_) | Resolution { .. }
            | WindowMismatch(_) | InvalidMultiplier { .. } | StepTooLarge { .. } | TimeOutOfRange { .. } | BandTooLow { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}
