//! Experiment plumbing for the protocol simulator: configuration, sweeps,
//! slope fits and attack campaigns. The `mpclab` binary is a thin CLI over
//! these modules.

pub mod attack;
pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;

use mpclab_core::RunError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigErrorKind),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Fit(#[from] fit::FitError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Configuration problems from either the file layer or argument checks.
#[derive(Debug, thiserror::Error)]
pub enum ConfigErrorKind {
    #[error(transparent)]
    File(#[from] config::ConfigError),
    #[error("{0}")]
    Invalid(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(ConfigErrorKind::Invalid(msg.into()))
    }

    /// Process exit code: 2 for anything the user can fix, 3 for an
    /// internal invariant violation.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invariant(_) => 3,
            _ => 2,
        }
    }
}

impl From<config::ConfigError> for HarnessError {
    fn from(e: config::ConfigError) -> Self {
        Self::Config(e.into())
    }
}
