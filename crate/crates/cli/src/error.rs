use std::io;
use std::path::PathBuf;

use cavity_gate::GateError;
use thiserror::Error;

/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code when an evaluator rejects its inputs or fails to converge.
pub const EXIT_EVALUATOR: u8 = 3;
/// Exit code when an output cannot be written.
pub const EXIT_OUTPUT: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("evaluation failed: {0}")]
    Evaluator(#[from] GateError),

    #[error("cannot write `{}`: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Output {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } => EXIT_CONFIG,
            Self::Evaluator(_) => EXIT_EVALUATOR,
            Self::Output { .. } => EXIT_OUTPUT,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
