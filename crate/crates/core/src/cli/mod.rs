//! Config-driven experiment runner behind the `qso` binary.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical diagnostic,
//! 1 I/O failure.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt::Display;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{cmd_classify, cmd_fixed_points, cmd_lyapunov, cmd_simulate};
pub use config::ExperimentConfig;

use crate::classify::ClassifyError;
use crate::ergodic::ErgodicError;
use crate::fixed_points::FixedPointError;
use crate::lyapunov::LyapunovError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical diagnostic: {0}")]
    Numerical(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, e: impl Display) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

impl From<ClassifyError> for AppError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NoCanonicalForm => AppError::Numerical(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<ErgodicError> for AppError {
    fn from(e: ErgodicError) -> Self {
        match e {
            ErgodicError::InvalidConfig(_)
            | ErgodicError::EpsilonTooLarge { .. }
            | ErgodicError::ParamsOutOfRange
            | ErgodicError::TooFewCheckpoints { .. } => AppError::Validation(e.to_string()),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

impl From<FixedPointError> for AppError {
    fn from(e: FixedPointError) -> Self {
        match e {
            FixedPointError::UnsupportedDimension(_) | FixedPointError::WrongFaceSize(_) => {
                AppError::Validation(e.to_string())
            }
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

impl From<LyapunovError> for AppError {
    fn from(e: LyapunovError) -> Self {
        match e {
            LyapunovError::SingularEntry { .. } | LyapunovError::DimensionMismatch { .. } => {
                AppError::Validation(e.to_string())
            }
            LyapunovError::Ergodic(inner) => inner.into(),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Simulate,
    Lyapunov,
    FixedPoints,
}

/// Loads the config, resolves the output directory (`out` overrides the
/// config's `output_dir`) and runs the command. Returns the output directory.
pub fn run(cmd: Command, config: &Path, out: Option<&Path>) -> Result<PathBuf, AppError> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| AppError::Validation("no output directory: pass --out or set output_dir".into()))?;
    std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
    match cmd {
        Command::Classify => cmd_classify(&cfg, &dir).map(drop),
        Command::Simulate => cmd_simulate(&cfg, &dir).map(drop),
        Command::Lyapunov => cmd_lyapunov(&cfg, &dir).map(drop),
        Command::FixedPoints => cmd_fixed_points(&cfg, &dir).map(drop),
    }?;
    Ok(dir)
}
