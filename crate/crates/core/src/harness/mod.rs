//! Trajectory files, evaluation reports, open-vs-closed comparison, experiment
//! configs and the command-line front end.

pub mod cli;
mod config;
mod report;
mod selftest;
mod trajectory;

use thiserror::Error;

use crate::airl::AirlError;
use crate::env::EnvError;
use crate::model::ModelError;
use crate::nn::NnError;
use crate::ppo::PpoError;

pub use config::ExperimentConfig;
pub use report::{
    compare_open_closed, evaluate_policies, evaluate_with, Comparison, EvalReport, Stat, DEFAULT_EVAL_STEPS,
};
pub use selftest::{selftest, Check};
pub use trajectory::{
    load_trajectories, read_trajectories, save_trajectories, write_trajectories, TrajectoryFile, TrajectoryHeader,
    TRAJECTORY_FORMAT, TRAJECTORY_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("reports are not comparable: {0}")]
    IncompatibleReports(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Airl(#[from] AirlError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

impl HarnessError {
    /// True for errors caused by bad input (files, configs, arguments) rather than by a
    /// failure while running.
    pub fn is_validation(&self) -> bool {
        match self {
            HarnessError::Parse { .. }
            | HarnessError::Schema(_)
            | HarnessError::IncompatibleReports(_)
            | HarnessError::Config(_)
            | HarnessError::Invalid(_) => true,
            HarnessError::Env(EnvError::InvalidConfig(_)) => true,
            HarnessError::Ppo(PpoError::InvalidConfig(_) | PpoError::Checkpoint(_)) => true,
            HarnessError::Airl(
                AirlError::InvalidConfig(_) | AirlError::InvalidDemonstration(_) | AirlError::Checkpoint(_),
            ) => true,
            _ => false,
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}
