//! Config-driven command-line front end.

pub mod config;
pub mod emit;
pub mod presets;
pub mod run;

use thiserror::Error;

use crate::error::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => CliError::Numerical(e),
            other => CliError::Precondition(other),
        }
    }
}
