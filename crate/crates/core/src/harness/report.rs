use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{io_error, HarnessError};
use crate::env::{episode_seed, EnvSpec, Mode};
use crate::model::{TeamAction, TeamState};
use crate::ppo::PolicyVector;

/// Matches the averaging window of the published tables.
pub const DEFAULT_EVAL_STEPS: usize = 10_000;

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }

    /// Normal-approximation 95% confidence interval of the mean over `n` samples.
    pub fn ci95(&self, n: usize) -> (f64, f64) {
        let half = 1.96 * self.std / (n.max(1) as f64).sqrt();
        (self.mean - half, self.mean + half)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    /// Environment and team size without the mode, e.g. `uff-2`.
    pub env: String,
    pub mode: Mode,
    pub spec: EnvSpec,
    pub greedy: bool,
    pub seed: u64,
    /// Environment steps consumed, including any unfinished final episode.
    pub steps: usize,
    /// Completed episodes the statistics are taken over.
    pub episodes: usize,
    pub reward: Stat,
    pub length: Stat,
    /// Steps per episode each agent spent in the acting team.
    pub active_steps: Vec<Stat>,
    /// Share of episodes that finished the task before the horizon.
    pub terminal_fraction: f64,
}

impl EvalReport {
    pub fn reward_ci95(&self) -> (f64, f64) {
        self.reward.ci95(self.episodes)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| io_error(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| io_error(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }
}

/// Runs `policy` for `n_steps` environment steps, resetting episode `k` with
/// `episode_seed(seed, k)`, and summarises the episodes that completed.
pub fn evaluate_with<F>(spec: &EnvSpec, n_steps: usize, seed: u64, greedy: bool, mut policy: F) -> Result<EvalReport, HarnessError>
where
    F: FnMut(&TeamState) -> Result<TeamAction, HarnessError>,
{
    let mut env = spec.build()?;
    let registry = env.registry().clone();
    let agents = registry.agent_count();
    let mut rewards = Vec::new();
    let mut lengths = Vec::new();
    let mut active: Vec<Vec<f64>> = vec![Vec::new(); agents];
    let mut terminals = 0usize;
    let mut used = 0usize;
    let mut episode = 0u64;
    'episodes: while used < n_steps {
        let mut state = env.reset(episode_seed(seed, episode));
        let mut total = 0.0;
        let mut counts = vec![0usize; agents];
        let mut length = 0usize;
        loop {
            if used == n_steps {
                break 'episodes;
            }
            let action = policy(&state)?;
            for &a in registry.members(state.team)? {
                counts[a] += 1;
            }
            let t = env.step(&action)?;
            used += 1;
            length += 1;
            total += t.reward;
            if t.done {
                rewards.push(total);
                lengths.push(length as f64);
                for (dst, c) in active.iter_mut().zip(&counts) {
                    dst.push(*c as f64);
                }
                terminals += usize::from(t.terminal);
                break;
            }
            state = t.state;
        }
        episode += 1;
    }
    if rewards.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "{n_steps} steps did not complete a single episode"
        )));
    }
    Ok(EvalReport {
        env: format!("{}-{}", spec.name(), spec.agent_count()),
        mode: spec.mode(),
        spec: spec.clone(),
        greedy,
        seed,
        steps: used,
        episodes: rewards.len(),
        reward: Stat::of(&rewards),
        length: Stat::of(&lengths),
        active_steps: active.iter().map(|a| Stat::of(a)).collect(),
        terminal_fraction: terminals as f64 / rewards.len() as f64,
    })
}

/// Greedy (mode of each actor) or sampled evaluation of trained policies in their
/// own environment.
pub fn evaluate_policies(
    policies: &PolicyVector,
    n_steps: usize,
    seed: u64,
    greedy: bool,
) -> Result<EvalReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(seed, u64::MAX));
    evaluate_with(policies.spec(), n_steps, seed, greedy, |s| {
        Ok(policies.act(s, greedy, &mut rng)?.0)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub env: String,
    pub open_mode: Mode,
    pub closed_mode: Mode,
    /// Open minus closed mean episode reward.
    pub reward_delta: f64,
    pub length_delta: f64,
    /// Open minus closed mean active steps, per agent.
    pub active_step_deltas: Vec<f64>,
    pub reward_improved: bool,
    /// Every agent after the first is active for fewer steps than in closed mode.
    pub called_agents_saved: bool,
    pub pass: bool,
}

/// Checks the directional hypotheses: higher reward in open mode, and agents that are
/// called in spend less time in the team than they do when present from the start.
pub fn compare_open_closed(open: &EvalReport, closed: &EvalReport) -> Result<Comparison, HarnessError> {
    if open.spec.with_mode(Mode::Open) != closed.spec.with_mode(Mode::Open) {
        return Err(HarnessError::IncompatibleReports(format!(
            "{} and {} use different environments",
            open.spec.tag(),
            closed.spec.tag()
        )));
    }
    if open.active_steps.len() != closed.active_steps.len() {
        return Err(HarnessError::IncompatibleReports(format!(
            "{} vs {} agents",
            open.active_steps.len(),
            closed.active_steps.len()
        )));
    }
    let reward_delta = open.reward.mean - closed.reward.mean;
    let active_step_deltas: Vec<f64> = open
        .active_steps
        .iter()
        .zip(&closed.active_steps)
        .map(|(o, c)| o.mean - c.mean)
        .collect();
    let reward_improved = reward_delta > 0.0;
    let called_agents_saved = active_step_deltas.iter().skip(1).all(|&d| d < 0.0);
    Ok(Comparison {
        env: open.env.clone(),
        open_mode: open.mode,
        closed_mode: closed.mode,
        reward_delta,
        length_delta: open.length.mean - closed.length.mean,
        active_step_deltas,
        reward_improved,
        called_agents_saved,
        pass: reward_improved && called_agents_saved,
    })
}
