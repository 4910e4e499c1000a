//! oDec-PPO: decentralized actors with a centralized critic, trained on the
//! clipped surrogate with an entropy bonus.

mod config;
mod policy;
mod rollout;
mod train;
mod update;

use thiserror::Error;

use crate::env::EnvError;
use crate::model::ModelError;
use crate::nn::NnError;

pub use config::TrainingConfig;
pub use policy::{PolicyVector, POLICY_FORMAT, POLICY_VERSION};
pub use rollout::{collect_parallel, collect_rollouts, EpisodeStats, RolloutBuffer, Step};
pub use train::{train_odec_ppo, write_curve, CurvePoint, PpoTrainer};
pub use update::{compute_targets, normalize, ppo_update, surrogate_terms, Optimizers, SurrogateTerms, UpdateReport};

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("malformed rollout buffer: {0}")]
    MalformedBuffer(String),
    #[error("loss became non-finite")]
    NonFiniteLoss,
    #[error("policy checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nn(#[from] NnError),
}
