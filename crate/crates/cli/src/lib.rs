//! Library side of the `ghznetsim` command-line tool: configuration, sweeps,
//! CSV/JSON/SVG output, Pareto and distance analyses, and oracle validation.

pub mod commands;
pub mod config;
pub mod distance;
pub mod output;
pub mod pareto;
pub mod svg;
pub mod sweep;
pub mod validate;

pub use config::{ExperimentSpec, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Sim(#[from] ghznetsim::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::InsufficientData(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Sim(e) if is_config_error(e) => 2,
            _ => 1,
        }
    }
}

fn is_config_error(e: &ghznetsim::Error) -> bool {
    use ghznetsim::Error::*;
    matches!(e, InvalidArgument(_) | UnsupportedSize(_))
}
