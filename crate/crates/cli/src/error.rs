use std::io;
use std::path::PathBuf;

use havok_arc_core::pipeline::{PipelineError, Stage};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error in scenario `{id}`: {message}")]
    Scenario { id: String, message: String },
    #[error("output directory {path} is not writable: {source}")]
    OutputDir { path: PathBuf, source: io::Error },
    #[error("scenario `{id}`: {error}")]
    Pipeline { id: String, error: PipelineError },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Scenario { .. } | CliError::OutputDir { .. } => 2,
            CliError::Pipeline { error, .. } => match error.stage {
                Stage::Simulation => 3,
                Stage::Decomposition | Stage::Detection => 4,
            },
            CliError::Io { .. } => 1,
        }
    }
}
