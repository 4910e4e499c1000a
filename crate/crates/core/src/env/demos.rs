use super::{EnvError, EnvSpec, Environment, ScriptedExpert};
use crate::model::{validate_trajectory, OpenTrajectory, Record, TeamAction, TeamState};

/// Seed of episode `episode` in a run seeded with `base` (SplitMix64 finalizer).
pub fn episode_seed(base: u64, episode: u64) -> u64 {
    let mut z = base ^ episode.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub reward: f64,
    pub length: usize,
    /// The task finished before the horizon.
    pub terminal: bool,
    /// Steps each agent spent in the acting team.
    pub active_steps: Vec<usize>,
}

impl EpisodeSummary {
    pub fn of(trajectory: &OpenTrajectory, registry: &crate::model::TeamRegistry, terminal: bool) -> Self {
        let mut active_steps = vec![0; registry.agent_count()];
        for record in &trajectory.records {
            if let Ok(members) = registry.members(record.team) {
                for &a in members {
                    active_steps[a] += 1;
                }
            }
        }
        Self {
            reward: trajectory.total_reward(),
            length: trajectory.horizon(),
            terminal,
            active_steps,
        }
    }
}

/// Runs one episode from `reset(seed)` until done, recording every step.
pub fn run_episode<F>(
    env: &mut dyn Environment,
    episode: u64,
    seed: u64,
    mut policy: F,
) -> Result<(OpenTrajectory, EpisodeSummary), EnvError>
where
    F: FnMut(&TeamState) -> Result<TeamAction, EnvError>,
{
    let mut state = env.reset(seed);
    let mut records = Vec::new();
    loop {
        let action = policy(&state)?;
        let t = env.step(&action)?;
        records.push(Record {
            team: state.team,
            state,
            action,
            reward: t.reward,
            done: t.done,
        });
        if t.done {
            let trajectory = OpenTrajectory::new(episode, records);
            let summary = EpisodeSummary::of(&trajectory, env.registry(), t.terminal);
            return Ok((trajectory, summary));
        }
        state = t.state;
    }
}

/// Whole expert episodes until at least `total_steps` steps are collected.
pub fn generate_demonstrations(
    spec: &EnvSpec,
    expert: &ScriptedExpert,
    total_steps: usize,
    seed: u64,
) -> Result<Vec<OpenTrajectory>, EnvError> {
    if total_steps == 0 {
        return Err(EnvError::InvalidConfig("total_steps must be positive".into()));
    }
    let mut env = spec.build()?;
    let mut out = Vec::new();
    let mut steps = 0;
    let mut episode = 0u64;
    while steps < total_steps {
        let (trajectory, summary) = run_episode(
            env.as_mut(),
            episode,
            episode_seed(seed, episode),
            |s| expert.act(s),
        )?;
        if !summary.terminal {
            return Err(EnvError::ExpertStall {
                episode,
                horizon: spec.horizon(),
                detail: format!("final state:\n{}", env.render()),
            });
        }
        if let Some(v) = validate_trajectory(&trajectory, env.registry()).first() {
            return Err(EnvError::InvalidConfig(format!("expert produced invalid record: {v}")));
        }
        steps += trajectory.horizon();
        out.push(trajectory);
        episode += 1;
    }
    Ok(out)
}

/// Re-runs the recorded actions from `reset(episode_seed(seed, episode))` and returns
/// the trajectory the environment actually produces.
pub fn replay(
    env: &mut dyn Environment,
    trajectory: &OpenTrajectory,
    seed: u64,
) -> Result<OpenTrajectory, EnvError> {
    let mut state = env.reset(episode_seed(seed, trajectory.episode));
    let mut records = Vec::with_capacity(trajectory.horizon());
    for recorded in &trajectory.records {
        let action = TeamAction {
            team: state.team,
            actions: recorded.action.actions.clone(),
        };
        let t = env.step(&action)?;
        records.push(Record {
            team: state.team,
            state,
            action,
            reward: t.reward,
            done: t.done,
        });
        state = t.state;
    }
    Ok(OpenTrajectory::new(trajectory.episode, records))
}
