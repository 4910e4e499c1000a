use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AirlError;
use crate::env::{EnvSpec, Featurizer};
use crate::model::{TeamAction, TeamState};
use crate::nn::{Activation, Checkpoint, Mlp};

pub const REWARD_FORMAT: &str = "odec-reward";
pub const REWARD_VERSION: u32 = 1;

/// `f_θ` over (team one-hot ⊕ team state ⊕ one-hot joint action).
#[derive(Clone, Debug)]
pub struct DiscriminatorModel {
    spec: EnvSpec,
    features: Featurizer,
    pub net: Mlp,
}

impl DiscriminatorModel {
    pub fn new<R: Rng + ?Sized>(spec: &EnvSpec, hidden: &[usize], rng: &mut R) -> Result<Self, AirlError> {
        let features = Featurizer::new(spec)?;
        let mut sizes = vec![features.reward_len()];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let net = Mlp::orthogonal(&sizes, Activation::Tanh, Activation::Linear, 2f64.sqrt(), 1.0, rng)?;
        Ok(Self {
            spec: spec.clone(),
            features,
            net,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn features(&self) -> &Featurizer {
        &self.features
    }

    pub fn input(&self, state: &TeamState, action: &TeamAction) -> Result<Vec<f64>, AirlError> {
        Ok(self.features.reward_input(state, action)?)
    }

    /// `f_θ(c, s, a)`.
    pub fn f(&self, state: &TeamState, action: &TeamAction) -> Result<f64, AirlError> {
        let out = self.net.predict(&self.input(state, action)?)?[0];
        if out.is_finite() {
            Ok(out)
        } else {
            Err(AirlError::NonFiniteInput)
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `D = e^f / (e^f + π)`, evaluated as the logistic of `f - log π`.
pub fn discriminator_output(f: f64, log_pi: f64) -> Result<f64, AirlError> {
    if !(f.is_finite() && log_pi.is_finite()) {
        return Err(AirlError::NonFiniteInput);
    }
    Ok(logistic(f - log_pi))
}

/// The log-odds of `D`, which is exactly `f - log π`.
pub fn extract_reward(f: f64, log_pi: f64) -> Result<f64, AirlError> {
    if !(f.is_finite() && log_pi.is_finite()) {
        return Err(AirlError::NonFiniteInput);
    }
    Ok(f - log_pi)
}

/// A frozen `f_θ` used as the team's common reward.
#[derive(Clone, Debug)]
pub struct LearnedReward {
    model: DiscriminatorModel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RewardCheckpoint {
    format: String,
    version: u32,
    env: EnvSpec,
    f_net: Checkpoint,
}

impl LearnedReward {
    pub fn freeze(model: &DiscriminatorModel) -> Self {
        Self { model: model.clone() }
    }

    pub fn model(&self) -> &DiscriminatorModel {
        &self.model
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.model.spec
    }

    pub fn f(&self, state: &TeamState, action: &TeamAction) -> Result<f64, AirlError> {
        self.model.f(state, action)
    }

    /// `f_θ(c, s, a) - log π`.
    pub fn reward(&self, state: &TeamState, action: &TeamAction, log_pi: f64) -> Result<f64, AirlError> {
        extract_reward(self.f(state, action)?, log_pi)
    }

    pub fn fingerprint(&self) -> u64 {
        self.model.net.fingerprint()
    }

    pub fn save(&self, path: &Path) -> Result<(), AirlError> {
        let ckpt = RewardCheckpoint {
            format: REWARD_FORMAT.into(),
            version: REWARD_VERSION,
            env: self.model.spec.clone(),
            f_net: self.model.net.to_checkpoint(),
        };
        let text = serde_json::to_string(&ckpt).map_err(|e| AirlError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| AirlError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, AirlError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AirlError::Checkpoint(format!("{}: {e}", path.display())))?;
        let ckpt: RewardCheckpoint =
            serde_json::from_str(&text).map_err(|e| AirlError::Checkpoint(e.to_string()))?;
        if ckpt.format != REWARD_FORMAT || ckpt.version != REWARD_VERSION {
            return Err(AirlError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        let features = Featurizer::new(&ckpt.env)?;
        let net = Mlp::from_checkpoint(ckpt.f_net)?;
        if net.input_len() != features.reward_len() || net.output_len() != 1 {
            return Err(AirlError::Checkpoint("network shape does not match the environment".into()));
        }
        Ok(Self {
            model: DiscriminatorModel {
                spec: ckpt.env,
                features,
                net,
            },
        })
    }
}
