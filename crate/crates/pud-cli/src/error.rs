//! Command errors mapped onto process exit codes:
//! 1 usage error, 2 data error, 3 numerical failure.

use pud_core::{EvalError, RankingError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<RankingError> for CliError {
    fn from(err: RankingError) -> Self {
        match err {
            RankingError::InvalidParam(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::InvalidParam(msg) => CliError::Usage(msg),
            EvalError::DuplicateImageId(id) => CliError::Data(format!("duplicate image id '{id}'")),
            EvalError::QueryFailed { .. } => CliError::Numerical(err.to_string()),
            EvalError::Ranking(inner) => inner.into(),
        }
    }
}
