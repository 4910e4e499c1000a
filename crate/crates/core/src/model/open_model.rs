use super::registry::{AgentId, TeamId, TeamRegistry};
use super::types::{Distribution, LocalState, TeamAction, TeamState};
use super::ModelError;

/// Mass tolerance for every distribution a model returns.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// An open decentralized MDP: teams drawn from a registry, a team transition
/// model, intra- and inter-team state transitions, a common reward, a start
/// prior and a discount.
///
/// Implementations must be pure; every method can be called from any thread.
pub trait OpenModel {
    fn registry(&self) -> &TeamRegistry;

    fn discount(&self) -> f64;

    fn action_count(&self, agent: AgentId) -> usize;

    /// Distribution over the next team given the current team and joint action.
    fn team_transition(&self, team: TeamId, action: &TeamAction) -> Distribution<TeamId>;

    /// Next-state distribution while the team stays the same.
    fn intra_transition(&self, state: &TeamState, action: &TeamAction) -> Distribution<TeamState>;

    /// Distribution over the state of team `next` when the team changes.
    fn inter_transition(&self, state: &TeamState, next: TeamId) -> Distribution<TeamState>;

    fn reward(&self, state: &TeamState, action: &TeamAction) -> f64;

    /// Joint start distribution over (team, team state).
    fn prior(&self) -> Distribution<TeamState>;

    /// Every state of `team`, for solvers that need the full table.
    fn team_states(&self, team: TeamId) -> Result<Vec<TeamState>, ModelError> {
        Err(ModelError::UnsupportedModel(format!(
            "team {team} has no enumerable state space"
        )))
    }

    /// Absorbing states with zero future value.
    fn is_terminal(&self, _state: &TeamState) -> bool {
        false
    }
}

/// Per-agent stochastic policy conditioned on the team id and the agent's own local state.
pub trait DecentralizedPolicy {
    fn action_probability(
        &self,
        agent: AgentId,
        team: TeamId,
        local: &LocalState,
        action: usize,
    ) -> f64;
}

/// Every joint action of `team`, members in ascending order, last member varying fastest.
pub fn joint_actions<M: OpenModel + ?Sized>(
    model: &M,
    team: TeamId,
) -> Result<Vec<TeamAction>, ModelError> {
    let members = model.registry().members(team)?;
    let counts: Vec<usize> = members.iter().map(|&a| model.action_count(a)).collect();
    let mut out = Vec::new();
    let mut current = vec![0usize; counts.len()];
    if counts.iter().any(|&c| c == 0) {
        return Ok(out);
    }
    loop {
        out.push(TeamAction {
            team,
            actions: current.clone(),
        });
        let mut k = counts.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            current[k] += 1;
            if current[k] < counts[k] {
                break;
            }
            current[k] = 0;
        }
    }
}

/// Checks that probabilities lie in [0, 1] and sum to 1 within [`DISTRIBUTION_TOLERANCE`].
pub fn check_distribution<T>(dist: &Distribution<T>, what: &str) -> Result<(), ModelError> {
    let mut total = 0.0;
    for (_, p) in dist {
        if !(0.0..=1.0 + DISTRIBUTION_TOLERANCE).contains(p) {
            return Err(ModelError::InvalidDistribution(format!(
                "{what}: probability {p} outside [0, 1]"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(ModelError::InvalidDistribution(format!(
            "{what}: mass {total} differs from 1"
        )));
    }
    Ok(())
}

/// Joint distribution over the next (team, team state): Γ composed with T_c when the
/// team is unchanged and with T'_c otherwise.
pub fn successor_distribution<M: OpenModel + ?Sized>(
    model: &M,
    state: &TeamState,
    action: &TeamAction,
) -> Distribution<TeamState> {
    let mut out = Vec::new();
    for (next_team, p_team) in model.team_transition(state.team, action) {
        if p_team == 0.0 {
            continue;
        }
        let states = if next_team == state.team {
            model.intra_transition(state, action)
        } else {
            model.inter_transition(state, next_team)
        };
        for (next, p) in states {
            if p > 0.0 {
                out.push((next, p_team * p));
            }
        }
    }
    out
}

/// Probability mass of `target` in `dist` (outcomes may repeat).
pub fn mass_of<T: PartialEq>(dist: &Distribution<T>, target: &T) -> f64 {
    dist.iter()
        .filter(|(x, _)| x == target)
        .map(|(_, p)| *p)
        .sum()
}
