//! Experiment recipes, sweeps and curve analysis on top of `qrc-core`.

pub mod analysis;
pub mod config;
pub mod experiment;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error(transparent)]
    Core(#[from] qrc_core::Error),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
