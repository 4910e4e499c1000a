//! A small hand-specified open model: two agents, two teams, binary local states
//! and binary actions. Agent 1 can be called in (team 1 -> team 2) and can leave
//! again (team 2 -> team 1), so both Γ branches and both transition kinds show up.

use super::open_model::{DecentralizedPolicy, OpenModel};
use super::registry::{AgentId, TeamId, TeamRegistry};
use super::types::{Distribution, LocalState, TeamAction, TeamState};
use super::ModelError;

pub const SOLO: TeamId = TeamId(1);
pub const PAIR: TeamId = TeamId(2);

#[derive(Clone, Debug)]
pub struct ToyModel {
    registry: TeamRegistry,
    discount: f64,
}

impl ToyModel {
    pub fn new(discount: f64) -> Self {
        let mut registry = TeamRegistry::new(2).expect("two agents");
        registry.register(&[0]).expect("solo team");
        registry.register(&[0, 1]).expect("pair team");
        Self { registry, discount }
    }

    pub fn solo(x: i32) -> TeamState {
        TeamState {
            team: SOLO,
            locals: vec![LocalState(vec![x])],
        }
    }

    pub fn pair(x: i32, y: i32) -> TeamState {
        TeamState {
            team: PAIR,
            locals: vec![LocalState(vec![x]), LocalState(vec![y])],
        }
    }

    /// P(x' | x, a) for agent 0 acting alone.
    pub fn solo_step(x: i32, a: usize, next: i32) -> f64 {
        let stay = if a == 0 { 0.9 } else { 0.5 };
        if next == x {
            stay
        } else {
            1.0 - stay
        }
    }

    /// P(v' | v, a) for one coordinate inside the pair, flipping with probability `flip`.
    pub fn pair_coordinate(v: i32, a: usize, next: i32, flip: f64) -> f64 {
        let target = v ^ a as i32;
        match (target == v, next == target) {
            (true, true) => 1.0,
            (true, false) => 0.0,
            (false, true) => flip,
            (false, false) => 1.0 - flip,
        }
    }

    /// Local state of agent 1 when it joins.
    pub fn joiner_prior(y: i32) -> f64 {
        if y == 0 {
            0.7
        } else {
            0.3
        }
    }
}

impl Default for ToyModel {
    fn default() -> Self {
        Self::new(0.9)
    }
}

fn local(state: &TeamState, k: usize) -> i32 {
    state.locals[k].0[0]
}

impl OpenModel for ToyModel {
    fn registry(&self) -> &TeamRegistry {
        &self.registry
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn action_count(&self, _agent: AgentId) -> usize {
        2
    }

    fn team_transition(&self, team: TeamId, action: &TeamAction) -> Distribution<TeamId> {
        match (team, action.actions.as_slice()) {
            (SOLO, [1]) => vec![(PAIR, 0.8), (SOLO, 0.2)],
            (PAIR, [1, 1]) => vec![(SOLO, 0.4), (PAIR, 0.6)],
            (c, _) => vec![(c, 1.0)],
        }
    }

    fn intra_transition(&self, state: &TeamState, action: &TeamAction) -> Distribution<TeamState> {
        match state.team {
            SOLO => {
                let x = local(state, 0);
                let a = action.actions[0];
                (0..2)
                    .map(|n| (Self::solo(n), Self::solo_step(x, a, n)))
                    .collect()
            }
            _ => {
                let (x, y) = (local(state, 0), local(state, 1));
                let (a, b) = (action.actions[0], action.actions[1]);
                let mut out = Vec::new();
                for nx in 0..2 {
                    for ny in 0..2 {
                        let p = Self::pair_coordinate(x, a, nx, 0.75)
                            * Self::pair_coordinate(y, b, ny, 0.6);
                        if p > 0.0 {
                            out.push((Self::pair(nx, ny), p));
                        }
                    }
                }
                out
            }
        }
    }

    fn inter_transition(&self, state: &TeamState, next: TeamId) -> Distribution<TeamState> {
        let x = local(state, 0);
        match next {
            PAIR => (0..2)
                .map(|y| (Self::pair(x, y), Self::joiner_prior(y)))
                .collect(),
            _ => vec![(Self::solo(x), 1.0)],
        }
    }

    fn reward(&self, state: &TeamState, action: &TeamAction) -> f64 {
        match state.team {
            SOLO => f64::from(local(state, 0)) - 0.1 * action.actions[0] as f64,
            _ => f64::from(local(state, 0) + local(state, 1)) - 0.3,
        }
    }

    fn prior(&self) -> Distribution<TeamState> {
        vec![
            (Self::solo(0), 0.5),
            (Self::solo(1), 0.2),
            (Self::pair(0, 0), 0.1),
            (Self::pair(1, 1), 0.2),
        ]
    }

    fn team_states(&self, team: TeamId) -> Result<Vec<TeamState>, ModelError> {
        match team {
            SOLO => Ok(vec![Self::solo(0), Self::solo(1)]),
            PAIR => Ok(vec![
                Self::pair(0, 0),
                Self::pair(0, 1),
                Self::pair(1, 0),
                Self::pair(1, 1),
            ]),
            other => Err(ModelError::UnknownTeam(other)),
        }
    }
}

/// Fixed stochastic per-agent policy for the toy model.
#[derive(Clone, Copy, Debug, Default)]
pub struct ToyPolicy;

impl ToyPolicy {
    pub fn probabilities(agent: AgentId, team: TeamId, x: i32) -> [f64; 2] {
        match (agent, team, x) {
            (0, SOLO, 0) => [0.6, 0.4],
            (0, SOLO, _) => [0.3, 0.7],
            (0, _, 0) => [0.5, 0.5],
            (0, _, _) => [0.8, 0.2],
            (_, _, 0) => [0.25, 0.75],
            (_, _, _) => [0.9, 0.1],
        }
    }
}

impl DecentralizedPolicy for ToyPolicy {
    fn action_probability(
        &self,
        agent: AgentId,
        team: TeamId,
        local: &LocalState,
        action: usize,
    ) -> f64 {
        Self::probabilities(agent, team, local.0[0])
            .get(action)
            .copied()
            .unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::open_model::{check_distribution, joint_actions};

    #[test]
    fn all_distributions_are_normalized() {
        let model = ToyModel::default();
        check_distribution(&model.prior(), "prior").unwrap();
        for team in model.registry().ids() {
            for state in model.team_states(team).unwrap() {
                for action in joint_actions(&model, team).unwrap() {
                    check_distribution(&model.team_transition(team, &action), "gamma").unwrap();
                    check_distribution(&model.intra_transition(&state, &action), "T").unwrap();
                }
                for next in model.registry().ids().filter(|&c| c != team) {
                    check_distribution(&model.inter_transition(&state, next), "T'").unwrap();
                }
            }
        }
    }
}
