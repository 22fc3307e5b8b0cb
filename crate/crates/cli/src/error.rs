use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitStatus {
    Ok = 0,
    ValidationFailed = 1,
    BadConfig = 2,
    InfeasibleCut = 3,
    DeterminismViolation = 4,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad config: {0}")]
    Config(String),

    #[error("{context} {}: {source}", path.display())]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solver: {0}")]
    Solver(#[from] equihybrid::Error),

    #[error("determinism violation: {0}")]
    Determinism(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(context: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            context,
            path: path.into(),
            source,
        }
    }

    /// Everything that is not an infeasible cut or a determinism violation
    /// comes from the configuration or the problem it describes.
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Solver(equihybrid::Error::Infeasible(_)) => ExitStatus::InfeasibleCut,
            CliError::Determinism(_) => ExitStatus::DeterminismViolation,
            _ => ExitStatus::BadConfig,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
