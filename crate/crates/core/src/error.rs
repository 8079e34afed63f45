//! Error type shared across the crate.
//!
//! Variants are grouped by how a caller should react: `InvalidInput` and
//! `Precondition` mean the arguments cannot be used as given, `Validation`
//! means a config or moment-assumption check failed before any work started,
//! and `Io`/`Json` wrap the usual plumbing failures.

use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code for the CLI: bad inputs and failed validation exit
    /// with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Precondition(_) | Error::Validation(_)
            | Error::Json(_) => 2,
            Error::Io(_) => 1,
        }
    }
}
