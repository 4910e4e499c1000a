use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

pub type AgentId = usize;

/// Integer identifier of a collaborating team. Identifiers start at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TeamId(pub u32);

impl TeamId {
    /// Zero-based slot, handy for one-hot encodings.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between non-empty agent subsets and consecutive team identifiers.
///
/// Identifiers are handed out lazily in registration order, so a registry only
/// ever holds the teams an environment actually reaches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeamRegistry {
    agent_count: usize,
    teams: Vec<Vec<AgentId>>,
    ids: HashMap<Vec<AgentId>, TeamId>,
}

impl TeamRegistry {
    pub fn new(agent_count: usize) -> Result<Self, ModelError> {
        if agent_count == 0 {
            return Err(ModelError::InvalidParameter(
                "agent_count must be positive".into(),
            ));
        }
        Ok(Self {
            agent_count,
            teams: Vec::new(),
            ids: HashMap::new(),
        })
    }

    /// Rebuilds a registry from an ordered table of subsets (id `k + 1` for entry `k`).
    pub fn from_table(agent_count: usize, table: &[Vec<AgentId>]) -> Result<Self, ModelError> {
        let mut registry = Self::new(agent_count)?;
        for (k, members) in table.iter().enumerate() {
            let id = registry.register(members)?;
            if id.index() != k {
                return Err(ModelError::InvalidTeam(format!(
                    "duplicate team {members:?} in registry table"
                )));
            }
        }
        Ok(registry)
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    /// Registers `agents` (order and duplicates ignored) and returns its identifier.
    /// Re-registering a known subset returns the existing identifier.
    pub fn register(&mut self, agents: &[AgentId]) -> Result<TeamId, ModelError> {
        let key = canonical(agents);
        if key.is_empty() {
            return Err(ModelError::InvalidTeam("empty agent subset".into()));
        }
        if let Some(&agent) = key.iter().find(|&&a| a >= self.agent_count) {
            return Err(ModelError::UnknownAgent {
                agent,
                agent_count: self.agent_count,
            });
        }
        if let Some(&id) = self.ids.get(&key) {
            return Ok(id);
        }
        let id = TeamId(self.teams.len() as u32 + 1);
        self.teams.push(key.clone());
        self.ids.insert(key, id);
        Ok(id)
    }

    /// Members of `team` in ascending agent order.
    pub fn members(&self, team: TeamId) -> Result<&[AgentId], ModelError> {
        if team.0 == 0 {
            return Err(ModelError::UnknownTeam(team));
        }
        self.teams
            .get(team.index())
            .map(Vec::as_slice)
            .ok_or(ModelError::UnknownTeam(team))
    }

    pub fn id_of(&self, agents: &[AgentId]) -> Option<TeamId> {
        self.ids.get(&canonical(agents)).copied()
    }

    pub fn contains(&self, team: TeamId) -> bool {
        team.0 >= 1 && team.index() < self.teams.len()
    }

    pub fn team_size(&self, team: TeamId) -> Result<usize, ModelError> {
        self.members(team).map(<[AgentId]>::len)
    }

    pub fn ids(&self) -> impl Iterator<Item = TeamId> + '_ {
        (1..=self.teams.len() as u32).map(TeamId)
    }

    /// Ordered subsets; entry `k` has identifier `k + 1`.
    pub fn table(&self) -> &[Vec<AgentId>] {
        &self.teams
    }
}

fn canonical(agents: &[AgentId]) -> Vec<AgentId> {
    let mut key = agents.to_vec();
    key.sort_unstable();
    key.dedup();
    key
}
