use front_forge_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::MissingArtifact(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidConfig(_)
            | Error::BadParams(_)
            | Error::DegenerateJump { .. }
            | Error::NonHyperbolic { .. }
            | Error::MismatchedShock(_) => CliError::Validation(e.to_string()),
            Error::Indeterminate { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
