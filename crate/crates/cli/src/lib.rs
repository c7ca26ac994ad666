//! Experiment runner behind the `slicer` binary: config files, named
//! recipes, CSV output and the statistical verifiers.

pub mod commands;
pub mod config_file;
pub mod csv;
pub mod recipes;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{run_experiments, sweep, verify_lemma1, verify_theorem1, VerifyOutcome};
pub use config_file::{apply_overrides, parse_config, ExperimentSpec};

/// Process exit code for a failed verification.
pub const EXIT_VERIFY_FAIL: u8 = 1;
/// Process exit code for usage and configuration errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] slicer_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
