use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: input width {input_width} and hidden width {hidden_width} must both be at least 1")]
    InvalidArchitecture {
        input_width: usize,
        hidden_width: usize,
    },

    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("unsupported model version {found} (expected {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}
