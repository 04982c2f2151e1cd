use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] akpz_core::Error),
    #[error(transparent)]
    Chaos(#[from] akpz_chaos::ChaosError),
    #[error(transparent)]
    Mct(#[from] akpz_mct::MctError),
    #[error("trajectory {index} (seed {seed}) failed: {source}")]
    Trajectory { index: u64, seed: u64, source: akpz_core::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("no results in {0}")]
    NoResults(String),
    #[error("missing inputs in {dir}: {files:?}")]
    MissingInputs { dir: String, files: Vec<String> },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
