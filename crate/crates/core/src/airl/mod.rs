//! oDec-AIRL: an adversarial discriminator over (team, state, joint action) whose
//! log-odds is the learned common reward, trained against oDec-PPO generators.

mod eval;
mod model;
mod train;
mod update;

use thiserror::Error;

use crate::env::EnvError;
use crate::model::ModelError;
use crate::nn::NnError;
use crate::ppo::PpoError;

pub use eval::{auc, evaluate_learned_reward};
pub use model::{
    discriminator_output, extract_reward, logistic, softplus, DiscriminatorModel, LearnedReward, REWARD_FORMAT,
    REWARD_VERSION,
};
pub use train::{
    train_odec_airl, write_diagnostics, AirlConfig, AirlOutcome, IterationDiagnostics, PhaseFingerprints,
};
pub use update::{bce_loss_and_grad, discriminator_step, discriminator_update, DiscriminatorStats, Labeled};

#[derive(Debug, Error)]
pub enum AirlError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite discriminator input")]
    NonFiniteInput,
    #[error("invalid IRL config: {0}")]
    InvalidConfig(String),
    #[error("invalid demonstration: {0}")]
    InvalidDemonstration(String),
    #[error("reward checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nn(#[from] NnError),
}
