use super::assembly::{self, Collab, TaskName, TaskStatus};
use super::uff::{self, FIRE_COUNT, FIRE_UNITS, POS};
use super::{EnvError, EnvSpec, Mode};
use crate::model::{AgentId, TeamAction, TeamRegistry, TeamState};

/// Fire visiting order per agent (0 = large, 1 = medium, 2 = small).
const FIRE_PREFERENCES: [[usize; FIRE_COUNT]; 3] = [[1, 2, 0], [0, 1, 2], [0, 2, 1]];

/// Rule-based demonstrator for both domains.
///
/// Firefighting: each agent walks to its most preferred burning fire and
/// extinguishes it. In open mode agent 0 calls the next agent while standing on a
/// fire as long as the remaining units cover `min_units_per_agent` for every
/// agent including the new one.
///
/// Assembly: the robot places parts on its own, calls the human one step before
/// the first screwing, and holds each part while the human screws it in.
#[derive(Clone, Debug)]
pub struct ScriptedExpert {
    spec: EnvSpec,
    registry: TeamRegistry,
    pub min_units_per_agent: i32,
}

impl ScriptedExpert {
    pub fn new(spec: &EnvSpec) -> Result<Self, EnvError> {
        Ok(Self {
            registry: spec.registry()?,
            spec: spec.clone(),
            min_units_per_agent: 7,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn act(&self, state: &TeamState) -> Result<TeamAction, EnvError> {
        let members = self.registry.members(state.team)?;
        let actions = match &self.spec {
            EnvSpec::Uff(config) => self.uff_actions(config, members, state),
            EnvSpec::Assembly(config) => assembly_actions(config.mode, members, state)?,
        };
        Ok(TeamAction {
            team: state.team,
            actions,
        })
    }

    fn uff_actions(
        &self,
        config: &uff::UffConfig,
        members: &[AgentId],
        state: &TeamState,
    ) -> Vec<usize> {
        let fires = config.fire_cells();
        let side = config.grid_side;
        let units: Vec<i32> = state.locals[0].values()[FIRE_UNITS..FIRE_UNITS + FIRE_COUNT].to_vec();
        let remaining: i32 = units.iter().sum();
        let can_call = config.mode == Mode::Open
            && members.len() < config.max_agents
            && remaining >= self.min_units_per_agent * (members.len() as i32 + 1);
        members
            .iter()
            .zip(&state.locals)
            .map(|(&agent, local)| {
                let pos = local.values()[POS] as usize;
                let on_fire = fires.iter().position(|&c| c == pos).filter(|&f| units[f] > 0);
                if on_fire.is_some() && agent == 0 && can_call {
                    return uff::CALL_AGENT;
                }
                if on_fire.is_some() {
                    return uff::EXTINGUISH;
                }
                let target = FIRE_PREFERENCES[agent % 3]
                    .iter()
                    .copied()
                    .find(|&f| units[f] > 0);
                match target {
                    Some(f) => step_toward(pos, fires[f], side),
                    None => uff::NORTH,
                }
            })
            .collect()
    }
}

fn step_toward(pos: usize, target: usize, side: usize) -> usize {
    let (r, c) = (pos / side, pos % side);
    let (tr, tc) = (target / side, target % side);
    if r < tr {
        uff::SOUTH
    } else if r > tr {
        uff::NORTH
    } else if c < tc {
        uff::EAST
    } else {
        uff::WEST
    }
}

fn assembly_actions(
    mode: Mode,
    members: &[AgentId],
    state: &TeamState,
) -> Result<Vec<usize>, EnvError> {
    let decode = |k: usize| {
        assembly::decode(&state.locals[k])
            .ok_or_else(|| EnvError::InvalidConfig(format!("bad assembly local {:?}", state.locals[k])))
    };
    let (task, status, _) = decode(0)?;
    let human_present = members.len() == 2;
    let robot = match (task, task.part()) {
        (TaskName::Done, _) => assembly::NO_OP,
        (TaskName::HoldForPartner, _) => assembly::HOLD_IN_PLACE,
        (_, Some((_, false))) => match status {
            TaskStatus::Chosen => assembly::PICK,
            TaskStatus::Picked => assembly::PLACE,
            _ => assembly::CHOOSE_TASK,
        },
        (_, Some((_, true))) if status != TaskStatus::Screwed => {
            if human_present {
                assembly::HOLD_IN_PLACE
            } else if mode == Mode::Open {
                assembly::CALL_AGENT
            } else {
                assembly::NO_OP
            }
        }
        _ => assembly::CHOOSE_TASK,
    };
    let mut actions = vec![robot];
    if human_present {
        let (task, status, collab) = decode(1)?;
        let ready = matches!(task.part(), Some((_, true)))
            && matches!(status, TaskStatus::NotStarted | TaskStatus::Chosen);
        let human = if ready && collab == Collab::Full {
            assembly::SCREW_IN
        } else if collab == Collab::Full {
            match (task.part(), status) {
                (Some((_, false)), TaskStatus::Chosen | TaskStatus::Picked) => assembly::RESET_TASK,
                _ => assembly::CHOOSE_TASK,
            }
        } else {
            assembly::NO_OP
        };
        actions.push(human);
    }
    Ok(actions)
}
