use serde::{Deserialize, Serialize};

use super::PpoError;
use crate::env::Mode;

/// oDec-PPO hyperparameters. Defaults are conventional PPO settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub gamma: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    /// Environment steps collected per update.
    pub rollout_len: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Global L2 clip applied to each network's gradient; 0 disables it.
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
    pub total_steps: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Parallel rollout workers; 1 is the deterministic single-threaded mode.
    /// Results depend on the worker count but not on thread scheduling.
    pub workers: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            clip: 0.2,
            entropy_coef: 0.01,
            epochs: 4,
            minibatch_size: 64,
            rollout_len: 2048,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            max_grad_norm: 0.5,
            hidden: vec![64, 64],
            total_steps: 200_000,
            seed: 0,
            mode: Mode::Open,
            workers: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let bad = |m: &str| Err(PpoError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return bad("clip must be in (0, 1)");
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return bad("entropy_coef must be non-negative");
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.rollout_len == 0 {
            return bad("epochs, minibatch_size and rollout_len must be positive");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.max_grad_norm >= 0.0) {
            return bad("max_grad_norm must be non-negative");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden layer widths must be positive");
        }
        if self.workers == 0 || self.workers > self.rollout_len {
            return bad("workers must be in 1..=rollout_len");
        }
        Ok(())
    }
}
