use std::collections::HashMap;
use std::fmt;

use super::open_model::{mass_of, OpenModel};
use super::registry::{AgentId, TeamId, TeamRegistry};
use super::types::OpenTrajectory;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownTeam(TeamId),
    TeamMismatch {
        record: TeamId,
        state: TeamId,
        action: TeamId,
    },
    ShapeMismatch {
        expected: usize,
        locals: usize,
        actions: usize,
    },
    LocalWidth {
        agent: AgentId,
        expected: usize,
        found: usize,
    },
    InvalidAction {
        agent: AgentId,
        action: usize,
    },
    UnreachableTeam {
        from: TeamId,
        to: TeamId,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {}: ", self.index)?;
        match &self.kind {
            ViolationKind::UnknownTeam(c) => write!(f, "team {c} is not registered"),
            ViolationKind::TeamMismatch {
                record,
                state,
                action,
            } => write!(
                f,
                "team ids disagree (record {record}, state {state}, action {action})"
            ),
            ViolationKind::ShapeMismatch {
                expected,
                locals,
                actions,
            } => write!(
                f,
                "team of {expected} carries {locals} local states and {actions} actions"
            ),
            ViolationKind::LocalWidth {
                agent,
                expected,
                found,
            } => write!(
                f,
                "agent {agent} local state has {found} values, earlier records had {expected}"
            ),
            ViolationKind::InvalidAction { agent, action } => {
                write!(f, "action {action} is invalid for agent {agent}")
            }
            ViolationKind::UnreachableTeam { from, to } => {
                write!(f, "team transition {from} -> {to} has zero probability")
            }
        }
    }
}

/// Structural checks against a registry. Returns an empty list iff every record is well formed.
pub fn validate_trajectory(trajectory: &OpenTrajectory, registry: &TeamRegistry) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut widths: HashMap<AgentId, usize> = HashMap::new();
    for (index, record) in trajectory.records.iter().enumerate() {
        let mut push = |kind| out.push(Violation { index, kind });
        if record.state.team != record.team || record.action.team != record.team {
            push(ViolationKind::TeamMismatch {
                record: record.team,
                state: record.state.team,
                action: record.action.team,
            });
        }
        let Ok(members) = registry.members(record.team) else {
            push(ViolationKind::UnknownTeam(record.team));
            continue;
        };
        if record.state.locals.len() != members.len()
            || record.action.actions.len() != members.len()
        {
            push(ViolationKind::ShapeMismatch {
                expected: members.len(),
                locals: record.state.locals.len(),
                actions: record.action.actions.len(),
            });
            continue;
        }
        for (&agent, local) in members.iter().zip(&record.state.locals) {
            let found = local.0.len();
            let expected = *widths.entry(agent).or_insert(found);
            if expected != found {
                push(ViolationKind::LocalWidth {
                    agent,
                    expected,
                    found,
                });
            }
        }
    }
    out
}

/// Structural checks plus action ranges and Γ support between consecutive records.
pub fn validate_against_model<M: OpenModel + ?Sized>(
    trajectory: &OpenTrajectory,
    model: &M,
) -> Vec<Violation> {
    let mut out = validate_trajectory(trajectory, model.registry());
    if !out.is_empty() {
        return out;
    }
    for (index, record) in trajectory.records.iter().enumerate() {
        let members = model
            .registry()
            .members(record.team)
            .expect("validated above");
        for (&agent, &action) in members.iter().zip(&record.action.actions) {
            if action >= model.action_count(agent) {
                out.push(Violation {
                    index,
                    kind: ViolationKind::InvalidAction { agent, action },
                });
            }
        }
    }
    for (index, pair) in trajectory.records.windows(2).enumerate() {
        let dist = model.team_transition(pair[0].team, &pair[0].action);
        if mass_of(&dist, &pair[1].team) == 0.0 {
            out.push(Violation {
                index: index + 1,
                kind: ViolationKind::UnreachableTeam {
                    from: pair[0].team,
                    to: pair[1].team,
                },
            });
        }
    }
    out
}
