use super::assembly::{self, Collab, TaskName, TaskStatus};
use super::uff::{self, FIRE_COUNT, FIRE_UNITS, POS, TEAMMATES_HERE};
use super::{EnvError, EnvSpec};
use crate::model::{LocalState, ModelError, TeamAction, TeamId, TeamRegistry, TeamState};

#[derive(Clone, Debug)]
enum Local {
    Uff {
        cells: usize,
        fires: [usize; FIRE_COUNT],
        full_units: f64,
        others: f64,
    },
    Assembly,
}

/// Turns team ids, local states and joint actions into network inputs.
///
/// * actor input: team one-hot ⊕ the agent's own local features
/// * critic input: team one-hot ⊕ for every agent slot an active flag and its local
///   features (zeros when inactive)
/// * reward input: critic input ⊕ a one-hot action per agent slot (zeros when inactive)
#[derive(Clone, Debug)]
pub struct Featurizer {
    registry: TeamRegistry,
    local: Local,
    local_len: usize,
    action_count: usize,
}

impl Featurizer {
    pub fn new(spec: &EnvSpec) -> Result<Self, EnvError> {
        let registry = spec.registry()?;
        let (local, local_len, action_count) = match spec {
            EnvSpec::Uff(c) => {
                let cells = c.cells();
                (
                    Local::Uff {
                        cells,
                        fires: c.fire_cells(),
                        full_units: f64::from(c.full_units()),
                        others: (c.max_agents.max(2) - 1) as f64,
                    },
                    cells + 2 * FIRE_COUNT + 2,
                    uff::ACTION_COUNT,
                )
            }
            EnvSpec::Assembly(_) => (
                Local::Assembly,
                TaskName::COUNT + TaskStatus::COUNT + Collab::COUNT,
                assembly::ACTION_COUNT,
            ),
        };
        Ok(Self {
            registry,
            local,
            local_len,
            action_count,
        })
    }

    pub fn registry(&self) -> &TeamRegistry {
        &self.registry
    }

    pub fn team_count(&self) -> usize {
        self.registry.len()
    }

    pub fn agent_count(&self) -> usize {
        self.registry.agent_count()
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn local_len(&self) -> usize {
        self.local_len
    }

    pub fn actor_len(&self) -> usize {
        self.team_count() + self.local_len
    }

    pub fn critic_len(&self) -> usize {
        self.team_count() + self.agent_count() * (1 + self.local_len)
    }

    pub fn reward_len(&self) -> usize {
        self.critic_len() + self.agent_count() * self.action_count
    }

    fn team_one_hot(&self, team: TeamId, out: &mut Vec<f64>) -> Result<(), ModelError> {
        if !self.registry.contains(team) {
            return Err(ModelError::UnknownTeam(team));
        }
        let start = out.len();
        out.resize(start + self.team_count(), 0.0);
        out[start + team.index()] = 1.0;
        Ok(())
    }

    fn local_into(&self, local: &LocalState, out: &mut Vec<f64>) {
        let v = local.values();
        let start = out.len();
        out.resize(start + self.local_len, 0.0);
        let o = &mut out[start..];
        match &self.local {
            Local::Uff {
                cells,
                fires,
                full_units,
                others,
            } => {
                let pos = v[POS] as usize;
                if pos < *cells {
                    o[pos] = 1.0;
                }
                let mut here = 0.0;
                for f in 0..FIRE_COUNT {
                    let units = f64::from(v[FIRE_UNITS + f]);
                    o[cells + 2 * f] = units / full_units;
                    o[cells + 2 * f + 1] = if units > 0.0 { 1.0 } else { 0.0 };
                    if fires[f] == pos {
                        here = units / full_units;
                    }
                }
                o[cells + 2 * FIRE_COUNT] = here;
                o[cells + 2 * FIRE_COUNT + 1] = f64::from(v[TEAMMATES_HERE]) / others;
            }
            Local::Assembly => {
                let widths = [TaskName::COUNT, TaskStatus::COUNT, Collab::COUNT];
                let mut offset = 0;
                for (k, w) in widths.into_iter().enumerate() {
                    if let Ok(i) = usize::try_from(v[k]) {
                        if i < w {
                            o[offset + i] = 1.0;
                        }
                    }
                    offset += w;
                }
            }
        }
    }

    pub fn actor_input(&self, team: TeamId, local: &LocalState) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.actor_len());
        self.team_one_hot(team, &mut out)?;
        self.local_into(local, &mut out);
        Ok(out)
    }

    pub fn critic_input(&self, state: &TeamState) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.reward_len());
        self.critic_into(state, &mut out)?;
        Ok(out)
    }

    fn critic_into(&self, state: &TeamState, out: &mut Vec<f64>) -> Result<(), ModelError> {
        self.team_one_hot(state.team, out)?;
        let members = self.registry.members(state.team)?;
        for agent in 0..self.agent_count() {
            match members.iter().position(|&m| m == agent) {
                Some(k) => {
                    out.push(1.0);
                    self.local_into(&state.locals[k], out);
                }
                None => out.resize(out.len() + 1 + self.local_len, 0.0),
            }
        }
        Ok(())
    }

    pub fn reward_input(&self, state: &TeamState, action: &TeamAction) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.reward_len());
        self.critic_into(state, &mut out)?;
        let members = self.registry.members(state.team)?;
        let start = out.len();
        out.resize(start + self.agent_count() * self.action_count, 0.0);
        for (&agent, &a) in members.iter().zip(&action.actions) {
            if a < self.action_count {
                out[start + agent * self.action_count + a] = 1.0;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Mode, UffConfig};

    #[test]
    fn actor_input_ignores_teammates() {
        let spec = EnvSpec::Uff(UffConfig::new(2, Mode::Closed));
        let f = Featurizer::new(&spec).unwrap();
        let mut env = spec.build().unwrap();
        let s = env.reset(0);
        let a = f.actor_input(s.team, &s.locals[0]).unwrap();
        let mut moved = s.clone();
        moved.locals[1].0[POS] = 4;
        assert_eq!(f.actor_input(moved.team, &moved.locals[0]).unwrap(), a);
        assert_ne!(f.critic_input(&moved).unwrap(), f.critic_input(&s).unwrap());
        assert_eq!(a.len(), f.actor_len());
        assert_eq!(f.team_count(), 1);
    }

    #[test]
    fn inactive_slots_are_zero() {
        let spec = EnvSpec::Uff(UffConfig::new(3, Mode::Open));
        let f = Featurizer::new(&spec).unwrap();
        let s = spec.build().unwrap().reset(0);
        let action = TeamAction {
            team: s.team,
            actions: vec![5],
        };
        let x = f.reward_input(&s, &action).unwrap();
        assert_eq!(x.len(), f.reward_len());
        let slot = 1 + f.local_len();
        let team = f.team_count();
        assert!(x[team + slot..team + 3 * slot].iter().all(|&v| v == 0.0));
        let acts = &x[f.critic_len()..];
        assert_eq!(acts.iter().sum::<f64>(), 1.0);
        assert_eq!(acts[5], 1.0);
    }
}
