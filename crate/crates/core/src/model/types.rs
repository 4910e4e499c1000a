use serde::{Deserialize, Serialize};

use super::registry::TeamId;

/// A single agent's locally observed state as a fixed-length vector of discrete values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalState(pub Vec<i32>);

impl LocalState {
    pub fn values(&self) -> &[i32] {
        &self.0
    }
}

/// Members' local states, in ascending agent order, tagged with the team that holds them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamState {
    pub team: TeamId,
    pub locals: Vec<LocalState>,
}

/// One action index per team member, in ascending agent order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamAction {
    pub team: TeamId,
    pub actions: Vec<usize>,
}

/// One step of an open trajectory: the acting team, its state and its joint action.
///
/// `reward` and `done` are carried along for replay and serialization; the
/// likelihood computations ignore them.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub team: TeamId,
    pub state: TeamState,
    pub action: TeamAction,
    pub reward: f64,
    pub done: bool,
}

impl Record {
    pub fn new(state: TeamState, action: TeamAction) -> Self {
        Self {
            team: state.team,
            state,
            action,
            reward: 0.0,
            done: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpenTrajectory {
    pub episode: u64,
    pub records: Vec<Record>,
}

impl OpenTrajectory {
    pub fn new(episode: u64, records: Vec<Record>) -> Self {
        Self { episode, records }
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }
}

/// Finite distribution as (outcome, probability) pairs.
pub type Distribution<T> = Vec<(T, f64)>;
