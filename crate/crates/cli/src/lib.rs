//! Experiment runner for the THz/mmWave hybrid network engine: configuration
//! parsing, parameter sweeps over the analytic and Monte Carlo engines, CSV
//! output and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod runner;
pub mod sweep;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("numerical failure: {0}")]
    Numerical(thzmm_core::Error),

    #[error("acceptance suite: {failed} of {total} criteria failed")]
    Acceptance { failed: usize, total: usize },
}

impl CliError {
    /// Maps an engine error raised while evaluating a sweep point. The base
    /// configuration is already validated, so parameter errors can only come
    /// from the sweep.
    pub fn from_core(e: thzmm_core::Error) -> Self {
        use thzmm_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::OutOfBand { .. } => CliError::Sweep(e.to_string()),
            other => CliError::Numerical(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Sweep(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Acceptance { .. } => 4,
        }
    }
}
