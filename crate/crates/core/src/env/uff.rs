//! Urban firefighting: agents on a square grid put out three fires of
//! different sizes, calling in extra firefighters when it pays off.

use serde::{Deserialize, Serialize};

use super::{check_action, growth_registry, EnvError, EnvSpec, Environment, Mode, Transition};
use crate::model::{
    AgentId, Distribution, LocalState, ModelError, OpenModel, TeamAction, TeamId, TeamRegistry,
    TeamState,
};

pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;
pub const CALL_AGENT: usize = 4;
pub const EXTINGUISH: usize = 5;
pub const ACTION_COUNT: usize = 6;
pub const ACTION_NAMES: [&str; ACTION_COUNT] =
    ["North", "South", "East", "West", "CallAgent", "Extinguish"];

pub const FIRE_COUNT: usize = 3;
pub const FIRE_NAMES: [&str; FIRE_COUNT] = ["large", "medium", "small"];

/// Layout of a local state vector. Intensities are stored in units of `extinguish_delta`.
pub const POS: usize = 0;
pub const FIRE_CELL: usize = 1;
pub const FIRE_UNITS: usize = 1 + FIRE_COUNT;
pub const TEAMMATES_HERE: usize = 1 + 2 * FIRE_COUNT;
pub const LOCAL_WIDTH: usize = 2 + 2 * FIRE_COUNT;

pub const START_CELL: usize = 0;
pub const SPAWN_CELL: usize = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UffConfig {
    pub mode: Mode,
    pub max_agents: usize,
    pub grid_side: usize,
    /// Large, medium and small fire.
    pub initial_intensities: [f64; FIRE_COUNT],
    pub extinguish_delta: f64,
    pub step_cost_per_active_agent: f64,
    /// Paid for every `extinguish_delta` of intensity removed.
    pub extinguish_reward_per_delta: f64,
    pub completion_bonus: f64,
    pub horizon: usize,
}

impl Default for UffConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Open,
            max_agents: 2,
            grid_side: 3,
            initial_intensities: [0.9, 0.6, 0.3],
            extinguish_delta: 0.1,
            step_cost_per_active_agent: 0.5,
            extinguish_reward_per_delta: 1.0,
            completion_bonus: 20.0,
            horizon: 50,
        }
    }
}

impl UffConfig {
    pub fn new(max_agents: usize, mode: Mode) -> Self {
        Self {
            mode,
            max_agents,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidConfig(m));
        if !(1..=6).contains(&self.max_agents) {
            return bad(format!("max_agents {} must be in 1..=6", self.max_agents));
        }
        if self.grid_side < 2 {
            return bad(format!("grid_side {} must be at least 2", self.grid_side));
        }
        if !(self.extinguish_delta > 0.0 && self.extinguish_delta <= 1.0) {
            return bad(format!(
                "extinguish_delta {} must be in (0, 1]",
                self.extinguish_delta
            ));
        }
        for &i in &self.initial_intensities {
            let units = i / self.extinguish_delta;
            if !(0.0..=1.0 + 1e-9).contains(&i) || (units - units.round()).abs() > 1e-6 {
                return bad(format!(
                    "intensity {i} must lie in [0, 1] on multiples of {}",
                    self.extinguish_delta
                ));
            }
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        for (name, v) in [
            ("step_cost_per_active_agent", self.step_cost_per_active_agent),
            ("extinguish_reward_per_delta", self.extinguish_reward_per_delta),
            ("completion_bonus", self.completion_bonus),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    /// Fire cells: large top-right, medium bottom-left, small bottom-right.
    pub fn fire_cells(&self) -> [usize; FIRE_COUNT] {
        let s = self.grid_side;
        [s - 1, s * (s - 1), s * s - 1]
    }

    pub fn initial_units(&self) -> [i32; FIRE_COUNT] {
        self.initial_intensities
            .map(|i| (i / self.extinguish_delta).round() as i32)
    }

    /// Units corresponding to intensity 1.0.
    pub fn full_units(&self) -> i32 {
        (1.0 / self.extinguish_delta).round() as i32
    }

    pub fn cells(&self) -> usize {
        self.grid_side * self.grid_side
    }
}

/// Exact tabular model of the firefighting domain.
#[derive(Clone, Debug)]
pub struct UffModel {
    config: UffConfig,
    registry: TeamRegistry,
    fires: [usize; FIRE_COUNT],
    discount: f64,
}

impl UffModel {
    pub fn new(config: UffConfig, discount: f64) -> Result<Self, EnvError> {
        config.validate()?;
        Ok(Self {
            registry: growth_registry(config.max_agents, config.mode),
            fires: config.fire_cells(),
            config,
            discount,
        })
    }

    pub fn config(&self) -> &UffConfig {
        &self.config
    }

    fn units(state: &TeamState) -> [i32; FIRE_COUNT] {
        let v = state.locals[0].values();
        [v[FIRE_UNITS], v[FIRE_UNITS + 1], v[FIRE_UNITS + 2]]
    }

    /// Builds a team state from member positions and fire units.
    pub fn compose(&self, team: TeamId, positions: &[usize], units: [i32; FIRE_COUNT]) -> TeamState {
        let locals = positions
            .iter()
            .enumerate()
            .map(|(k, &pos)| {
                let here = positions
                    .iter()
                    .enumerate()
                    .filter(|&(j, &p)| j != k && p == pos)
                    .count();
                let mut v = Vec::with_capacity(LOCAL_WIDTH);
                v.push(pos as i32);
                v.extend(self.fires.iter().map(|&c| c as i32));
                v.extend_from_slice(&units);
                v.push(here as i32);
                LocalState(v)
            })
            .collect();
        TeamState { team, locals }
    }

    fn positions(state: &TeamState) -> Vec<usize> {
        state.locals.iter().map(|l| l.values()[POS] as usize).collect()
    }

    fn moved(&self, pos: usize, action: usize) -> usize {
        let s = self.config.grid_side;
        let (r, c) = (pos / s, pos % s);
        let (r, c) = match action {
            NORTH => (r.saturating_sub(1), c),
            SOUTH => ((r + 1).min(s - 1), c),
            EAST => (r, (c + 1).min(s - 1)),
            WEST => (r, c.saturating_sub(1)),
            _ => (r, c),
        };
        r * s + c
    }

    /// Team after `action`: CallAgent adds the lowest-index inactive agent.
    pub fn next_team(&self, team: TeamId, action: &TeamAction) -> TeamId {
        if self.config.mode == Mode::Closed {
            return team;
        }
        let Ok(members) = self.registry.members(team) else {
            return team;
        };
        if members.len() < self.config.max_agents && action.actions.contains(&CALL_AGENT) {
            let grown: Vec<AgentId> = (0..=members.len()).collect();
            if let Some(next) = self.registry.id_of(&grown) {
                return next;
            }
        }
        team
    }

    /// Positions after moves and fire units after extinguishing, plus units removed.
    fn advance(&self, state: &TeamState, action: &TeamAction) -> (Vec<usize>, [i32; FIRE_COUNT], i32) {
        let mut positions = Self::positions(state);
        let mut units = Self::units(state);
        let mut removed = 0;
        for (pos, &a) in positions.iter_mut().zip(&action.actions) {
            if a == EXTINGUISH {
                if let Some(f) = self.fires.iter().position(|&c| c == *pos) {
                    if units[f] > 0 {
                        units[f] -= 1;
                        removed += 1;
                    }
                }
            } else {
                *pos = self.moved(*pos, a);
            }
        }
        (positions, units, removed)
    }

    /// Returns (next state, reward, terminal) for a deterministic step.
    pub fn transition(&self, state: &TeamState, action: &TeamAction) -> (TeamState, f64, bool) {
        let cost = self.config.step_cost_per_active_agent * state.locals.len() as f64;
        let next_team = self.next_team(state.team, action);
        if next_team != state.team {
            let mut positions = Self::positions(state);
            positions.push(SPAWN_CELL);
            let next = self.compose(next_team, &positions, Self::units(state));
            return (next, -cost, false);
        }
        let before: i32 = Self::units(state).iter().sum();
        let (positions, units, removed) = self.advance(state, action);
        let finished = before > 0 && units.iter().all(|&u| u == 0);
        let mut reward = self.config.extinguish_reward_per_delta * f64::from(removed) - cost;
        if finished {
            reward += self.config.completion_bonus;
        }
        (
            self.compose(state.team, &positions, units),
            reward,
            units.iter().all(|&u| u == 0),
        )
    }

    pub fn start_state(&self) -> TeamState {
        let team = TeamId(1);
        let size = self.registry.team_size(team).expect("registered");
        self.compose(team, &vec![START_CELL; size], self.config.initial_units())
    }
}

impl OpenModel for UffModel {
    fn registry(&self) -> &TeamRegistry {
        &self.registry
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn action_count(&self, _agent: AgentId) -> usize {
        ACTION_COUNT
    }

    fn team_transition(&self, team: TeamId, action: &TeamAction) -> Distribution<TeamId> {
        vec![(self.next_team(team, action), 1.0)]
    }

    fn intra_transition(&self, state: &TeamState, action: &TeamAction) -> Distribution<TeamState> {
        let (positions, units, _) = self.advance(state, action);
        vec![(self.compose(state.team, &positions, units), 1.0)]
    }

    fn inter_transition(&self, state: &TeamState, next: TeamId) -> Distribution<TeamState> {
        let Ok(size) = self.registry.team_size(next) else {
            return vec![];
        };
        let mut positions = Self::positions(state);
        positions.resize(size, SPAWN_CELL);
        vec![(self.compose(next, &positions, Self::units(state)), 1.0)]
    }

    fn reward(&self, state: &TeamState, action: &TeamAction) -> f64 {
        self.transition(state, action).1
    }

    fn prior(&self) -> Distribution<TeamState> {
        vec![(self.start_state(), 1.0)]
    }

    fn team_states(&self, team: TeamId) -> Result<Vec<TeamState>, ModelError> {
        let size = self.registry.team_size(team)?;
        let cells = self.config.cells();
        let init = self.config.initial_units();
        let mut out = Vec::new();
        let mut positions = vec![0usize; size];
        loop {
            for u0 in 0..=init[0] {
                for u1 in 0..=init[1] {
                    for u2 in 0..=init[2] {
                        out.push(self.compose(team, &positions, [u0, u1, u2]));
                    }
                }
            }
            let mut k = size;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                positions[k] += 1;
                if positions[k] < cells {
                    break;
                }
                positions[k] = 0;
            }
        }
    }

    fn is_terminal(&self, state: &TeamState) -> bool {
        Self::units(state).iter().all(|&u| u == 0)
    }
}

/// Stateful firefighting episode runner.
#[derive(Clone, Debug)]
pub struct UffEnv {
    spec: EnvSpec,
    model: UffModel,
    state: TeamState,
    elapsed: usize,
    done: bool,
    last_reward: f64,
    episode_return: f64,
}

impl UffEnv {
    pub fn new(config: UffConfig) -> Result<Self, EnvError> {
        let model = UffModel::new(config.clone(), 0.99)?;
        let state = model.start_state();
        Ok(Self {
            spec: EnvSpec::Uff(config),
            model,
            state,
            elapsed: 0,
            done: false,
            last_reward: 0.0,
            episode_return: 0.0,
        })
    }

    pub fn model(&self) -> &UffModel {
        &self.model
    }

    pub fn units(&self) -> [i32; FIRE_COUNT] {
        UffModel::units(&self.state)
    }
}

impl Environment for UffEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn registry(&self) -> &TeamRegistry {
        self.model.registry()
    }

    fn action_count(&self, _agent: AgentId) -> usize {
        ACTION_COUNT
    }

    /// The layout is fixed, so every seed yields the same start.
    fn reset(&mut self, _seed: u64) -> TeamState {
        self.state = self.model.start_state();
        self.elapsed = 0;
        self.done = false;
        self.last_reward = 0.0;
        self.episode_return = 0.0;
        self.state.clone()
    }

    fn step(&mut self, action: &TeamAction) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        check_action(self.model.registry(), self.state.team, action, |_| ACTION_COUNT)?;
        let (next, reward, terminal) = self.model.transition(&self.state, action);
        self.state = next;
        self.elapsed += 1;
        self.done = terminal || self.elapsed >= self.model.config.horizon;
        self.last_reward = reward;
        self.episode_return += reward;
        Ok(Transition {
            state: self.state.clone(),
            reward,
            done: self.done,
            terminal,
        })
    }

    fn state(&self) -> &TeamState {
        &self.state
    }

    fn elapsed(&self) -> usize {
        self.elapsed
    }

    fn render(&self) -> String {
        let members = self.model.registry().members(self.state.team).unwrap_or(&[]);
        let positions = UffModel::positions(&self.state);
        let units = UffModel::units(&self.state);
        let mut out = format!(
            "t={} team={} {:?} reward={:.2} return={:.2}\n",
            self.elapsed, self.state.team, members, self.last_reward, self.episode_return
        );
        let side = self.model.config.grid_side;
        for row in 0..side {
            let mut cells = Vec::with_capacity(side);
            for col in 0..side {
                let cell = row * side + col;
                let fire = match self.model.fires.iter().position(|&c| c == cell) {
                    Some(f) => format!("{}{}", &FIRE_NAMES[f][..1].to_uppercase(), units[f]),
                    None => "..".to_string(),
                };
                let agents: String = members
                    .iter()
                    .zip(&positions)
                    .filter(|&(_, &p)| p == cell)
                    .map(|(a, _)| a.to_string())
                    .collect();
                cells.push(format!("{fire:<3}{agents:<3}"));
            }
            out.push_str(cells.join("|").trim_end());
            out.push('\n');
        }
        out
    }
}
