use std::path::Path;

use thiserror::Error;
use turing_rd::Error as ModelError;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const KINETIC_NAMES: [&str; 15] = [
    "alpha",
    "gamma",
    "delta",
    "epsilon",
    "beta",
    "r",
    "K",
    "a",
    "b",
    "m",
    "gamma_dim",
    "delta_dim",
    "D1",
    "D2",
    "l_dim",
];

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::Usage(format!("{}: {err}", path.display()))
    }

    /// 0 success, 1 usage or config, 2 analysis domain, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => 1,
            Self::Model(e) => match e {
                ModelError::NonFiniteState { .. } => 3,
                ModelError::InvalidParameter { name, .. } if KINETIC_NAMES.contains(name) => 2,
                ModelError::InvalidParameter { .. }
                | ModelError::GridTooSmall { .. }
                | ModelError::GridMismatch(_)
                | ModelError::StepRejected { .. } => 1,
                _ => 2,
            },
        }
    }
}
