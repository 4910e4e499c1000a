//! Discrete team environments with designed rewards, scripted experts and
//! demonstration generation.

pub mod assembly;
mod demos;
mod expert;
mod features;
pub mod uff;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentId, ModelError, TeamAction, TeamId, TeamRegistry, TeamState};

pub use assembly::{AssemblyConfig, AssemblyEnv};
pub use demos::{episode_seed, generate_demonstrations, replay, run_episode, EpisodeSummary};
pub use expert::ScriptedExpert;
pub use features::Featurizer;
pub use uff::{UffConfig, UffEnv, UffModel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Agents join when called in.
    #[default]
    Open,
    /// The full team is present from the first step and CallAgent does nothing.
    Closed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Open => "open",
            Mode::Closed => "closed",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Mode::Open),
            "closed" => Ok(Mode::Closed),
            other => Err(EnvError::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("action {action} is invalid for agent {agent}")]
    InvalidAction { agent: AgentId, action: usize },
    #[error("joint action is for team {found}, current team is {expected}")]
    TeamMismatch { expected: TeamId, found: TeamId },
    #[error("joint action has {found} entries, team has {expected} members")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("episode is over; call reset first")]
    EpisodeOver,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("expert did not finish episode {episode} within {horizon} steps ({detail})")]
    ExpertStall {
        episode: u64,
        horizon: usize,
        detail: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: TeamState,
    pub reward: f64,
    /// The episode is over, either because the task finished or the horizon was hit.
    pub done: bool,
    /// The task finished (as opposed to a horizon cut-off).
    pub terminal: bool,
}

/// A resettable, seeded team environment.
///
/// Instances own their RNG and are single-threaded; run several instances for parallelism.
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn registry(&self) -> &TeamRegistry;

    fn action_count(&self, agent: AgentId) -> usize;

    fn reset(&mut self, seed: u64) -> TeamState;

    fn step(&mut self, action: &TeamAction) -> Result<Transition, EnvError>;

    fn state(&self) -> &TeamState;

    /// Steps taken since the last reset.
    fn elapsed(&self) -> usize;

    /// One plain-text frame describing the current state.
    fn render(&self) -> String;

    fn agent_count(&self) -> usize {
        self.registry().agent_count()
    }

    fn mode(&self) -> Mode {
        self.spec().mode()
    }
}

/// Environment selection plus its configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvSpec {
    Uff(UffConfig),
    Assembly(AssemblyConfig),
}

impl EnvSpec {
    pub fn mode(&self) -> Mode {
        match self {
            EnvSpec::Uff(c) => c.mode,
            EnvSpec::Assembly(c) => c.mode,
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            EnvSpec::Uff(c) => c.mode = mode,
            EnvSpec::Assembly(c) => c.mode = mode,
        }
        spec
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Uff(_) => "uff",
            EnvSpec::Assembly(_) => "assembly",
        }
    }

    pub fn agent_count(&self) -> usize {
        match self {
            EnvSpec::Uff(c) => c.max_agents,
            EnvSpec::Assembly(_) => 2,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvSpec::Uff(c) => c.horizon,
            EnvSpec::Assembly(c) => c.horizon,
        }
    }

    /// Short tag such as `uff-2-open`, used in reports.
    pub fn tag(&self) -> String {
        format!("{}-{}-{}", self.name(), self.agent_count(), self.mode())
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match self {
            EnvSpec::Uff(c) => c.validate(),
            EnvSpec::Assembly(c) => c.validate(),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>, EnvError> {
        Ok(match self {
            EnvSpec::Uff(c) => Box::new(UffEnv::new(c.clone())?),
            EnvSpec::Assembly(c) => Box::new(AssemblyEnv::new(c.clone())?),
        })
    }

    /// The team registry the built environment will use.
    pub fn registry(&self) -> Result<TeamRegistry, EnvError> {
        Ok(self.build()?.registry().clone())
    }
}

/// Teams reachable by calling agents in one at a time, in encounter order.
/// Closed mode only ever sees the full team.
pub(crate) fn growth_registry(agent_count: usize, mode: Mode) -> TeamRegistry {
    let mut registry = TeamRegistry::new(agent_count).expect("positive agent count");
    let first = match mode {
        Mode::Open => 1,
        Mode::Closed => agent_count,
    };
    for size in first..=agent_count {
        let members: Vec<AgentId> = (0..size).collect();
        registry.register(&members).expect("valid subset");
    }
    registry
}

pub(crate) fn check_action(
    registry: &TeamRegistry,
    current: TeamId,
    action: &TeamAction,
    action_count: impl Fn(AgentId) -> usize,
) -> Result<(), EnvError> {
    if action.team != current {
        return Err(EnvError::TeamMismatch {
            expected: current,
            found: action.team,
        });
    }
    let members = registry.members(current)?;
    if members.len() != action.actions.len() {
        return Err(EnvError::ShapeMismatch {
            expected: members.len(),
            found: action.actions.len(),
        });
    }
    for (&agent, &a) in members.iter().zip(&action.actions) {
        if a >= action_count(agent) {
            return Err(EnvError::InvalidAction { agent, action: a });
        }
    }
    Ok(())
}
