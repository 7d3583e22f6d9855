use std::io;

/// Errors surfaced by the front end. Core errors pass through unchanged.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] m1chain_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// serde_json reports line and column of the offending token.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
