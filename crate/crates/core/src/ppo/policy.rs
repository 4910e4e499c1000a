use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PpoError;
use crate::env::{EnvSpec, Featurizer};
use crate::model::{AgentId, DecentralizedPolicy, LocalState, TeamAction, TeamId, TeamState};
use crate::nn::{Activation, Categorical, Checkpoint, Mlp};

pub const POLICY_FORMAT: &str = "odec-policy";
pub const POLICY_VERSION: u32 = 1;

/// One actor per agent plus a centralized critic.
///
/// Actors see only the team one-hot and their own local state; the critic sees
/// the whole team state. Actors of agents outside the acting team are never run.
#[derive(Clone, Debug)]
pub struct PolicyVector {
    spec: EnvSpec,
    features: Featurizer,
    pub actors: Vec<Mlp>,
    pub critic: Mlp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolicyCheckpoint {
    format: String,
    version: u32,
    env: EnvSpec,
    actors: Vec<Checkpoint>,
    critic: Checkpoint,
}

impl PolicyVector {
    pub fn new<R: Rng + ?Sized>(spec: &EnvSpec, hidden: &[usize], rng: &mut R) -> Result<Self, PpoError> {
        let features = Featurizer::new(spec)?;
        let mut actor_sizes = vec![features.actor_len()];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(features.action_count());
        let mut critic_sizes = vec![features.critic_len()];
        critic_sizes.extend_from_slice(hidden);
        critic_sizes.push(1);
        let gain = 2f64.sqrt();
        let actors = (0..features.agent_count())
            .map(|_| Mlp::orthogonal(&actor_sizes, Activation::Tanh, Activation::Linear, gain, 0.01, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let critic = Mlp::orthogonal(&critic_sizes, Activation::Tanh, Activation::Linear, gain, 1.0, rng)?;
        Ok(Self {
            spec: spec.clone(),
            features,
            actors,
            critic,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn features(&self) -> &Featurizer {
        &self.features
    }

    pub fn agent_count(&self) -> usize {
        self.actors.len()
    }

    pub fn logits(&self, agent: AgentId, team: TeamId, local: &LocalState) -> Result<Vec<f64>, PpoError> {
        let actor = self.actor(agent)?;
        let input = self.features.actor_input(team, local)?;
        Ok(actor.predict(&input)?)
    }

    pub fn distribution(&self, agent: AgentId, team: TeamId, local: &LocalState) -> Result<Categorical, PpoError> {
        Ok(Categorical::from_logits(&self.logits(agent, team, local)?)?)
    }

    /// Every member's action distribution, in member order.
    pub fn distributions(&self, state: &TeamState) -> Result<Vec<Categorical>, PpoError> {
        let members = self.features.registry().members(state.team)?;
        if members.len() != state.locals.len() {
            return Err(PpoError::Model(crate::model::ModelError::MalformedRecord(format!(
                "team {} has {} members but {} locals",
                state.team,
                members.len(),
                state.locals.len()
            ))));
        }
        members
            .iter()
            .zip(&state.locals)
            .map(|(&agent, local)| self.distribution(agent, state.team, local))
            .collect()
    }

    /// Samples (or, when `greedy`, takes the mode of) each member's action.
    /// Returns the joint action and each member's log-probability.
    pub fn act<R: Rng + ?Sized>(
        &self,
        state: &TeamState,
        greedy: bool,
        rng: &mut R,
    ) -> Result<(TeamAction, Vec<f64>), PpoError> {
        let dists = self.distributions(state)?;
        let mut actions = Vec::with_capacity(dists.len());
        let mut log_probs = Vec::with_capacity(dists.len());
        for d in &dists {
            let a = if greedy { d.mode() } else { d.sample(rng) };
            actions.push(a);
            log_probs.push(d.log_prob(a));
        }
        Ok((
            TeamAction {
                team: state.team,
                actions,
            },
            log_probs,
        ))
    }

    /// Joint log-probability: the sum of the members' log-probabilities.
    pub fn log_prob(&self, state: &TeamState, action: &TeamAction) -> Result<f64, PpoError> {
        let dists = self.distributions(state)?;
        if dists.len() != action.actions.len() {
            return Err(PpoError::Model(crate::model::ModelError::MalformedRecord(format!(
                "{} actions for {} members",
                action.actions.len(),
                dists.len()
            ))));
        }
        Ok(dists.iter().zip(&action.actions).map(|(d, &a)| d.log_prob(a)).sum())
    }

    pub fn value(&self, state: &TeamState) -> Result<f64, PpoError> {
        let input = self.features.critic_input(state)?;
        Ok(self.critic.predict(&input)?[0])
    }

    fn actor(&self, agent: AgentId) -> Result<&Mlp, PpoError> {
        self.actors.get(agent).ok_or(PpoError::Model(crate::model::ModelError::UnknownAgent {
            agent,
            agent_count: self.actors.len(),
        }))
    }

    /// Hash of the actor parameters (critic excluded).
    pub fn actor_fingerprint(&self) -> u64 {
        self.actors
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, a| (h ^ a.fingerprint()).wrapping_mul(0x100_0000_01b3))
    }

    pub fn save(&self, path: &Path) -> Result<(), PpoError> {
        let ckpt = PolicyCheckpoint {
            format: POLICY_FORMAT.into(),
            version: POLICY_VERSION,
            env: self.spec.clone(),
            actors: self.actors.iter().map(Mlp::to_checkpoint).collect(),
            critic: self.critic.to_checkpoint(),
        };
        let text = serde_json::to_string(&ckpt).map_err(|e| PpoError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| PpoError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, PpoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PpoError::Checkpoint(format!("{}: {e}", path.display())))?;
        let ckpt: PolicyCheckpoint =
            serde_json::from_str(&text).map_err(|e| PpoError::Checkpoint(e.to_string()))?;
        if ckpt.format != POLICY_FORMAT || ckpt.version != POLICY_VERSION {
            return Err(PpoError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        let features = Featurizer::new(&ckpt.env)?;
        let actors = ckpt
            .actors
            .into_iter()
            .map(Mlp::from_checkpoint)
            .collect::<Result<Vec<_>, _>>()?;
        let critic = Mlp::from_checkpoint(ckpt.critic)?;
        if actors.len() != features.agent_count()
            || actors.iter().any(|a| a.input_len() != features.actor_len() || a.output_len() != features.action_count())
            || critic.input_len() != features.critic_len()
            || critic.output_len() != 1
        {
            return Err(PpoError::Checkpoint("network shapes do not match the environment".into()));
        }
        Ok(Self {
            spec: ckpt.env,
            features,
            actors,
            critic,
        })
    }
}

impl DecentralizedPolicy for PolicyVector {
    fn action_probability(&self, agent: AgentId, team: TeamId, local: &LocalState, action: usize) -> f64 {
        self.distribution(agent, team, local)
            .map(|d| d.probs().get(action).copied().unwrap_or(0.0))
            .unwrap_or(0.0)
    }
}
