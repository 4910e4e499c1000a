//! Collaborative furniture assembly: a robot places four table parts on its
//! own and needs a human partner to screw each one in while it holds the part.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, growth_registry, EnvError, EnvSpec, Environment, Mode, Transition};
use crate::model::{AgentId, LocalState, TeamAction, TeamId, TeamRegistry, TeamState};

pub const ROBOT: AgentId = 0;
pub const HUMAN: AgentId = 1;

pub const CHOOSE_TASK: usize = 0;
pub const PICK: usize = 1;
pub const PLACE: usize = 2;
pub const HOLD_IN_PLACE: usize = 3;
pub const SCREW_IN: usize = 4;
pub const CALL_AGENT: usize = 5;
pub const RESET_TASK: usize = 6;
pub const NO_OP: usize = 7;
pub const ACTION_COUNT: usize = 8;
pub const ACTION_NAMES: [&str; ACTION_COUNT] = [
    "ChooseTask",
    "Pick",
    "Place",
    "HoldInPlace",
    "ScrewIn",
    "CallAgent",
    "ResetTask",
    "NoOp",
];

/// Local state layout.
pub const TASK: usize = 0;
pub const STATUS: usize = 1;
pub const COLLAB: usize = 2;
pub const LOCAL_WIDTH: usize = 3;

macro_rules! discrete {
    ($name:ident [$($v:ident),+ $(,)?]) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($v),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$v),+];
            pub const COUNT: usize = Self::ALL.len();

            pub fn from_index(i: i32) -> Option<Self> {
                usize::try_from(i).ok().and_then(|i| Self::ALL.get(i).copied())
            }

            pub fn index(self) -> i32 {
                self as i32
            }

            pub fn name(self) -> &'static str {
                match self { $($name::$v => stringify!($v)),+ }
            }
        }
    };
}

discrete!(TaskName [
    Idle, PlaceSupport1, ScrewSupport1, PlaceSupport2, ScrewSupport2,
    PlaceLeg1, ScrewLeg1, PlaceLeg2, ScrewLeg2, HoldForPartner, Done,
]);
discrete!(TaskStatus [NotStarted, Chosen, Picked, Placed, Holding, Screwed, Reset]);
discrete!(Collab [Unavailable, Partial, Full]);

pub const PART_COUNT: usize = 4;
pub const PART_NAMES: [&str; PART_COUNT] = ["support1", "support2", "leg1", "leg2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Progress {
    Unplaced,
    Placed,
    Screwed,
}

impl TaskName {
    pub fn place(part: usize) -> Self {
        Self::ALL[1 + 2 * part]
    }

    pub fn screw(part: usize) -> Self {
        Self::ALL[2 + 2 * part]
    }

    /// The part this task works on and whether it is a screwing task.
    pub fn part(self) -> Option<(usize, bool)> {
        let i = self.index();
        (1..=8).contains(&i).then(|| (((i - 1) / 2) as usize, i % 2 == 0))
    }
}

/// Part that must be screwed before `part` can be placed.
fn prerequisite(part: usize) -> Option<usize> {
    match part {
        2 => Some(0),
        3 => Some(1),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssemblyConfig {
    pub mode: Mode,
    pub step_cost: f64,
    /// Extra cost factor for every step the human spends in the team.
    pub human_cost_multiplier: f64,
    pub subtask_completion_reward: f64,
    pub completion_bonus: f64,
    pub horizon: usize,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Open,
            step_cost: 0.1,
            human_cost_multiplier: 2.0,
            subtask_completion_reward: 1.0,
            completion_bonus: 10.0,
            horizon: 60,
        }
    }
}

impl AssemblyConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.horizon == 0 {
            return Err(EnvError::InvalidConfig("horizon must be positive".into()));
        }
        for (name, v) in [
            ("step_cost", self.step_cost),
            ("human_cost_multiplier", self.human_cost_multiplier),
            ("subtask_completion_reward", self.subtask_completion_reward),
            ("completion_bonus", self.completion_bonus),
        ] {
            if !v.is_finite() {
                return Err(EnvError::InvalidConfig(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slot {
    task: TaskName,
    status: TaskStatus,
}

impl Slot {
    const IDLE: Slot = Slot {
        task: TaskName::Idle,
        status: TaskStatus::NotStarted,
    };

    /// Working on an independent placement that has not finished.
    fn engaged_part(&self) -> Option<usize> {
        match self.task.part() {
            Some((p, false)) if matches!(self.status, TaskStatus::Chosen | TaskStatus::Picked) => {
                Some(p)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AssemblyEnv {
    spec: EnvSpec,
    config: AssemblyConfig,
    registry: TeamRegistry,
    rng: ChaCha8Rng,
    robot: Slot,
    human: Slot,
    human_present: bool,
    parts: [Progress; PART_COUNT],
    hold: Option<usize>,
    state: TeamState,
    elapsed: usize,
    done: bool,
    screws: usize,
    last_reward: f64,
    episode_return: f64,
}

impl AssemblyEnv {
    pub fn new(config: AssemblyConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let registry = growth_registry(2, config.mode);
        let mut env = Self {
            spec: EnvSpec::Assembly(config.clone()),
            registry,
            rng: ChaCha8Rng::seed_from_u64(0),
            robot: Slot::IDLE,
            human: Slot::IDLE,
            human_present: config.mode == Mode::Closed,
            parts: [Progress::Unplaced; PART_COUNT],
            hold: None,
            state: TeamState {
                team: TeamId(1),
                locals: vec![],
            },
            elapsed: 0,
            done: false,
            screws: 0,
            last_reward: 0.0,
            episode_return: 0.0,
            config,
        };
        env.reset(0);
        Ok(env)
    }

    /// Successful human screwing steps so far in this episode.
    pub fn episode_screws(&self) -> usize {
        self.screws
    }

    pub fn parts(&self) -> [Progress; PART_COUNT] {
        self.parts
    }

    pub fn human_present(&self) -> bool {
        self.human_present
    }

    /// Part the robot currently needs a partner to screw in.
    fn help_target(&self) -> Option<usize> {
        match (self.robot.task, self.robot.task.part()) {
            (TaskName::HoldForPartner, _) => self.hold,
            (_, Some((p, true))) if self.robot.status != TaskStatus::Screwed => Some(p),
            _ => None,
        }
    }

    fn collab(&self, agent: AgentId) -> Collab {
        if !self.human_present {
            return Collab::Unavailable;
        }
        let target = self.help_target();
        let on_target = target.is_some() && target.map(TaskName::screw) == Some(self.human.task);
        match (agent, target) {
            (HUMAN, Some(_)) => Collab::Full,
            (ROBOT, Some(_)) if on_target => Collab::Full,
            _ => Collab::Partial,
        }
    }

    fn local(&self, agent: AgentId) -> LocalState {
        let slot = if agent == ROBOT { self.robot } else { self.human };
        LocalState(vec![
            slot.task.index(),
            slot.status.index(),
            self.collab(agent).index(),
        ])
    }

    fn refresh_state(&mut self) {
        let (team, agents): (TeamId, &[AgentId]) = if self.human_present {
            (self.registry.id_of(&[ROBOT, HUMAN]).expect("pair"), &[ROBOT, HUMAN])
        } else {
            (self.registry.id_of(&[ROBOT]).expect("robot"), &[ROBOT])
        };
        self.state = TeamState {
            team,
            locals: agents.iter().map(|&a| self.local(a)).collect(),
        };
    }

    fn available_places(&self, exclude: Option<usize>) -> Vec<usize> {
        (0..PART_COUNT)
            .filter(|&p| self.parts[p] == Progress::Unplaced && Some(p) != exclude)
            .filter(|&p| prerequisite(p).is_none_or(|q| self.parts[q] == Progress::Screwed))
            .collect()
    }

    fn choose_for_robot(&mut self) {
        let exclude = self.human.engaged_part();
        let mut options: Vec<TaskName> = self
            .available_places(exclude)
            .into_iter()
            .map(TaskName::place)
            .collect();
        options.extend(
            (0..PART_COUNT)
                .filter(|&p| self.parts[p] == Progress::Placed)
                .map(TaskName::screw),
        );
        self.hold = None;
        self.robot = match options.choose(&mut self.rng) {
            Some(&task) => Slot {
                task,
                status: TaskStatus::Chosen,
            },
            None if self.parts.iter().all(|&p| p == Progress::Screwed) => Slot {
                task: TaskName::Done,
                status: TaskStatus::NotStarted,
            },
            None => Slot::IDLE,
        };
    }

    fn choose_for_human(&mut self) {
        if self.human.engaged_part().is_some() {
            return;
        }
        if let Some(p) = self.help_target() {
            self.human = Slot {
                task: TaskName::screw(p),
                status: TaskStatus::Chosen,
            };
            return;
        }
        let options = self.available_places(self.robot.engaged_part());
        self.human = match options.choose(&mut self.rng) {
            Some(&p) => Slot {
                task: TaskName::place(p),
                status: TaskStatus::Chosen,
            },
            None => Slot::IDLE,
        };
    }

    /// Pick or place for either agent. Returns completed subtasks.
    fn handle_part(&mut self, agent: AgentId, action: usize) -> usize {
        let slot = if agent == ROBOT { self.robot } else { self.human };
        let Some((p, false)) = slot.task.part() else {
            return 0;
        };
        let mut next = slot;
        let mut done = 0;
        match (action, slot.status) {
            (PICK, TaskStatus::Chosen) if self.parts[p] == Progress::Unplaced => {
                next.status = TaskStatus::Picked;
            }
            (PLACE, TaskStatus::Picked) if self.parts[p] == Progress::Unplaced => {
                self.parts[p] = Progress::Placed;
                next.status = TaskStatus::Placed;
                done = 1;
            }
            _ => {}
        }
        if agent == ROBOT {
            self.robot = next;
        } else {
            self.human = next;
        }
        done
    }

    fn reset_slot(slot: &mut Slot, hold: &mut Option<usize>) {
        if slot.engaged_part().is_some() {
            *slot = Slot {
                task: TaskName::Idle,
                status: TaskStatus::Reset,
            };
        } else if slot.task == TaskName::HoldForPartner {
            *slot = Slot {
                task: hold.map(TaskName::screw).unwrap_or(TaskName::Idle),
                status: TaskStatus::Reset,
            };
            *hold = None;
        }
    }

    fn advance(&mut self, robot_action: usize, human_action: Option<usize>) -> usize {
        let mut completed = 0;
        let mut holding = None;
        match robot_action {
            CHOOSE_TASK => self.choose_for_robot(),
            PICK | PLACE => completed += self.handle_part(ROBOT, robot_action),
            HOLD_IN_PLACE => {
                if let Some(p) = self.help_target() {
                    if self.parts[p] == Progress::Placed {
                        self.robot = Slot {
                            task: TaskName::HoldForPartner,
                            status: TaskStatus::Holding,
                        };
                        self.hold = Some(p);
                        holding = Some(p);
                    }
                }
            }
            RESET_TASK => Self::reset_slot(&mut self.robot, &mut self.hold),
            _ => {}
        }
        let Some(action) = human_action else {
            return completed;
        };
        match action {
            CHOOSE_TASK => self.choose_for_human(),
            PICK | PLACE => completed += self.handle_part(HUMAN, action),
            SCREW_IN => {
                if let (Some(p), Some((q, true))) = (holding, self.human.task.part()) {
                    if p == q && self.parts[p] == Progress::Placed {
                        self.parts[p] = Progress::Screwed;
                        self.human.status = TaskStatus::Screwed;
                        self.robot = Slot {
                            task: TaskName::screw(p),
                            status: TaskStatus::Screwed,
                        };
                        self.hold = None;
                        self.screws += 1;
                        completed += 1;
                    }
                }
            }
            RESET_TASK => {
                let mut none = None;
                Self::reset_slot(&mut self.human, &mut none);
            }
            _ => {}
        }
        completed
    }
}

impl Environment for AssemblyEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn registry(&self) -> &TeamRegistry {
        &self.registry
    }

    fn action_count(&self, _agent: AgentId) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, seed: u64) -> TeamState {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.robot = Slot::IDLE;
        self.human = Slot::IDLE;
        self.human_present = self.config.mode == Mode::Closed;
        self.parts = [Progress::Unplaced; PART_COUNT];
        self.hold = None;
        self.elapsed = 0;
        self.done = false;
        self.screws = 0;
        self.last_reward = 0.0;
        self.episode_return = 0.0;
        self.refresh_state();
        self.state.clone()
    }

    fn step(&mut self, action: &TeamAction) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        check_action(&self.registry, self.state.team, action, |_| ACTION_COUNT)?;
        let c = &self.config;
        let cost = c.step_cost * (1.0 + if self.human_present { c.human_cost_multiplier } else { 0.0 });
        let robot_action = action.actions[0];
        let mut reward = -cost;
        let mut terminal = false;
        if !self.human_present && self.config.mode == Mode::Open && robot_action == CALL_AGENT {
            // Joining step: the human arrives ready for the part the robot needs help with.
            self.human_present = true;
            self.human = Slot {
                task: self.help_target().map(TaskName::screw).unwrap_or(TaskName::Idle),
                status: TaskStatus::NotStarted,
            };
        } else {
            let completed = self.advance(robot_action, action.actions.get(1).copied());
            reward += self.config.subtask_completion_reward * completed as f64;
            if self.parts.iter().all(|&p| p == Progress::Screwed) {
                terminal = true;
                reward += self.config.completion_bonus;
                self.robot.task = TaskName::Done;
                if self.human_present {
                    self.human.task = TaskName::Done;
                }
            }
        }
        self.refresh_state();
        self.elapsed += 1;
        self.done = terminal || self.elapsed >= self.config.horizon;
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
        let members = self.registry.members(self.state.team).unwrap_or(&[]);
        let mut out = format!(
            "t={} team={} {:?} reward={:.2} return={:.2}\n",
            self.elapsed, self.state.team, members, self.last_reward, self.episode_return
        );
        for (name, agent) in [("robot", ROBOT), ("human", HUMAN)] {
            if agent == HUMAN && !self.human_present {
                out.push_str("human  absent\n");
                continue;
            }
            let slot = if agent == ROBOT { self.robot } else { self.human };
            out.push_str(&format!(
                "{name}  {} {} {}\n",
                slot.task.name(),
                slot.status.name(),
                self.collab(agent).name()
            ));
        }
        let parts: Vec<String> = PART_NAMES
            .iter()
            .zip(&self.parts)
            .map(|(n, p)| format!("{n}={p:?}"))
            .collect();
        out.push_str(&format!("parts  {}\n", parts.join(" ")));
        out
    }
}

/// Decodes a local state into its three named components.
pub fn decode(local: &LocalState) -> Option<(TaskName, TaskStatus, Collab)> {
    let v = local.values();
    if v.len() != LOCAL_WIDTH {
        return None;
    }
    Some((
        TaskName::from_index(v[TASK])?,
        TaskStatus::from_index(v[STATUS])?,
        Collab::from_index(v[COLLAB])?,
    ))
}
