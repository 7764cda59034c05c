use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{0}")]
    Validation(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub(crate) fn missing(path: &Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingInput(path.display().to_string())
        } else {
            CliError::Internal(format!("{}: {err}", path.display()))
        }
    }

    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Internal(format!("{}: {err}", path.display()))
    }
}

impl From<cogtrack::Error> for CliError {
    fn from(e: cogtrack::Error) -> Self {
        use cogtrack::Error as E;
        match e {
            E::UndefinedAngle => CliError::Internal(e.to_string()),
            E::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
