use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numeric(stirmix_core::Error),
    #[error("{0}")]
    PartialFailure(String),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for numerical failures, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Numeric(_) | CliError::PartialFailure(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<stirmix_core::Error> for CliError {
    fn from(e: stirmix_core::Error) -> Self {
        use stirmix_core::Error as E;
        match e {
            E::InvalidGrid(_)
            | E::InvalidArgument(_)
            | E::DeltaOutOfRange { .. }
            | E::GeometryError { .. }
            | E::SupportViolation { .. }
            | E::LengthMismatch { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
