use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PolicyVector, PpoError};
use crate::env::{EnvError, Environment};
use crate::model::{TeamAction, TeamState};

/// One environment step as seen by the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub state: TeamState,
    pub action: TeamAction,
    /// Log-probability of each member's action under the sampling policy.
    pub log_probs: Vec<f64>,
    /// Training signal. Starts as the environment reward; IRL overwrites it.
    pub reward: f64,
    /// The environment's designed reward, kept for reporting.
    pub env_reward: f64,
    /// The episode ended here (task finished or horizon reached).
    pub done: bool,
    /// The rollout ended here with the episode still running.
    pub truncated: bool,
}

impl Step {
    pub fn is_boundary(&self) -> bool {
        self.done || self.truncated
    }
}

/// Designed-reward outcome of an episode completed during collection.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeStats {
    pub reward: f64,
    pub length: usize,
    pub terminal: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RolloutBuffer {
    pub steps: Vec<Step>,
    pub episodes: Vec<EpisodeStats>,
    /// Discounted reward-to-go; empty until `compute_targets`.
    pub targets: Vec<f64>,
    /// Normalized advantages; empty until `compute_targets`.
    pub advantages: Vec<f64>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn has_targets(&self) -> bool {
        !self.steps.is_empty() && self.targets.len() == self.steps.len() && self.advantages.len() == self.steps.len()
    }

    pub fn mean_episode_reward(&self) -> Option<f64> {
        if self.episodes.is_empty() {
            None
        } else {
            Some(self.episodes.iter().map(|e| e.reward).sum::<f64>() / self.episodes.len() as f64)
        }
    }

    /// Appends `other`, dropping any derived targets.
    pub fn extend(&mut self, other: RolloutBuffer) {
        self.steps.extend(other.steps);
        self.episodes.extend(other.episodes);
        self.targets.clear();
        self.advantages.clear();
    }
}

/// Runs the sampled policies for `n_steps` environment steps, starting from a fresh
/// reset and resetting whenever an episode ends. Reset seeds are drawn from `rng`.
pub fn collect_rollouts<R: Rng + ?Sized>(
    policies: &PolicyVector,
    env: &mut dyn Environment,
    n_steps: usize,
    rng: &mut R,
) -> Result<RolloutBuffer, PpoError> {
    let mut buffer = RolloutBuffer::default();
    if n_steps == 0 {
        return Ok(buffer);
    }
    buffer.steps.reserve(n_steps);
    let mut state = env.reset(rng.gen());
    let mut episode_reward = 0.0;
    let mut episode_len = 0;
    for i in 0..n_steps {
        let (action, log_probs) = policies.act(&state, false, rng)?;
        let t = env.step(&action).map_err(PpoError::from)?;
        episode_reward += t.reward;
        episode_len += 1;
        buffer.steps.push(Step {
            state,
            action,
            log_probs,
            reward: t.reward,
            env_reward: t.reward,
            done: t.done,
            truncated: !t.done && i + 1 == n_steps,
        });
        if t.done {
            buffer.episodes.push(EpisodeStats {
                reward: episode_reward,
                length: episode_len,
                terminal: t.terminal,
            });
            episode_reward = 0.0;
            episode_len = 0;
            state = env.reset(rng.gen());
        } else {
            state = t.state;
        }
    }
    Ok(buffer)
}

/// Splits `n_steps` over one environment per worker, each with its own RNG stream
/// seeded from `seeds`, and concatenates the buffers in worker order. The result is
/// independent of thread scheduling.
pub fn collect_parallel(
    policies: &PolicyVector,
    envs: &mut [Box<dyn Environment>],
    n_steps: usize,
    seeds: &[u64],
) -> Result<RolloutBuffer, PpoError> {
    assert_eq!(envs.len(), seeds.len(), "one seed per worker");
    let workers = envs.len().max(1);
    let share = |w: usize| n_steps / workers + usize::from(w < n_steps % workers);
    if envs.len() == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds[0]);
        return collect_rollouts(policies, envs[0].as_mut(), n_steps, &mut rng);
    }
    let results: Vec<Result<RolloutBuffer, PpoError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = envs
            .iter_mut()
            .zip(seeds)
            .enumerate()
            .map(|(w, (env, &seed))| {
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    collect_rollouts(policies, env.as_mut(), share(w), &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(PpoError::Env(EnvError::InvalidConfig("rollout worker panicked".into()))))
            })
            .collect()
    });
    let mut buffer = RolloutBuffer::default();
    for r in results {
        buffer.extend(r?);
    }
    Ok(buffer)
}
