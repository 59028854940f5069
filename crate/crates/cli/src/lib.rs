//! Orchestration for the GAN benchmark: data preparation, training of the
//! three families, evaluation, significance testing and reporting.

pub mod commands;
pub mod config;
pub mod plot;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::{BenchmarkConfig, LoadedConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("training failed for {family}: {message}")]
    Training { family: String, message: String },
    #[error("no completed runs found under {0}")]
    MissingRuns(String),
    #[error("report error: {0}")]
    Report(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Training { .. } => 4,
            CliError::MissingRuns(_) | CliError::Report(_) => 5,
        }
    }

    pub(crate) fn report(e: impl std::fmt::Display) -> Self {
        CliError::Report(e.to_string())
    }

    pub(crate) fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: serde::Serialize>(
    value: &T,
    path: &std::path::Path,
) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text)
}
