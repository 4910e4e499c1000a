use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_error, HarnessError};
use crate::env::EnvSpec;
use crate::model::{
    validate_trajectory, AgentId, LocalState, OpenTrajectory, Record, TeamAction, TeamId, TeamRegistry, TeamState,
};

pub const TRAJECTORY_FORMAT: &str = "odec-trajectories";
pub const TRAJECTORY_VERSION: u32 = 1;

/// First line of a trajectory file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub format: String,
    pub version: u32,
    /// Short tag such as `uff-2-open`.
    pub env: String,
    pub spec: EnvSpec,
    /// Base seed the episodes were generated with, when known. Episode `k` was reset
    /// with `episode_seed(seed, k)`.
    pub seed: Option<u64>,
    /// Team table: entry `k` lists the members of team `k + 1`.
    pub registry: Vec<Vec<AgentId>>,
}

impl TrajectoryHeader {
    pub fn new(spec: &EnvSpec, seed: Option<u64>) -> Result<Self, HarnessError> {
        Ok(Self {
            format: TRAJECTORY_FORMAT.into(),
            version: TRAJECTORY_VERSION,
            env: spec.tag(),
            spec: spec.clone(),
            seed,
            registry: spec.registry()?.table().to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryFile {
    pub header: TrajectoryHeader,
    pub trajectories: Vec<OpenTrajectory>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    ep: u64,
    t: usize,
    c: u32,
    agents: Vec<AgentLine>,
    r: f64,
    done: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentLine {
    id: AgentId,
    s: Vec<i32>,
    a: usize,
}

/// Writes the header and one line per step.
pub fn write_trajectories<W: Write>(
    mut out: W,
    header: &TrajectoryHeader,
    trajectories: &[OpenTrajectory],
) -> Result<(), HarnessError> {
    let registry = registry_of(header)?;
    let json = |e: serde_json::Error| HarnessError::Io(e.to_string());
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    serde_json::to_writer(&mut out, header).map_err(json)?;
    out.write_all(b"\n").map_err(io)?;
    for traj in trajectories {
        if let Some(v) = validate_trajectory(traj, &registry).first() {
            return Err(HarnessError::Schema(format!("episode {}: {v}", traj.episode)));
        }
        for (t, rec) in traj.records.iter().enumerate() {
            if !rec.reward.is_finite() {
                return Err(HarnessError::Schema(format!("episode {} step {t}: non-finite reward", traj.episode)));
            }
            let members = registry.members(rec.team)?;
            let line = Line {
                ep: traj.episode,
                t,
                c: rec.team.0,
                agents: members
                    .iter()
                    .zip(&rec.state.locals)
                    .zip(&rec.action.actions)
                    .map(|((&id, s), &a)| AgentLine { id, s: s.0.clone(), a })
                    .collect(),
                r: rec.reward,
                done: rec.done,
            };
            serde_json::to_writer(&mut out, &line).map_err(json)?;
            out.write_all(b"\n").map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn save_trajectories(
    path: &Path,
    header: &TrajectoryHeader,
    trajectories: &[OpenTrajectory],
) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_trajectories(BufWriter::new(file), header, trajectories)
}

/// Parses and validates a trajectory file. Lines are numbered from 1 (the header).
pub fn read_trajectories<R: BufRead>(input: R) -> Result<TrajectoryFile, HarnessError> {
    let mut lines = input.lines().enumerate().map(|(k, l)| (k + 1, l));
    let parse = |line: usize, e: &dyn std::fmt::Display| HarnessError::Parse {
        line,
        message: e.to_string(),
    };
    let Some((_, first)) = lines.next() else {
        return Err(HarnessError::Parse {
            line: 1,
            message: "missing header".into(),
        });
    };
    let first = first.map_err(|e| parse(1, &e))?;
    let header: TrajectoryHeader = serde_json::from_str(&first).map_err(|e| parse(1, &e))?;
    if header.format != TRAJECTORY_FORMAT || header.version != TRAJECTORY_VERSION {
        return Err(HarnessError::Schema(format!(
            "unsupported format {:?} version {}",
            header.format, header.version
        )));
    }
    let registry = registry_of(&header)?;
    let expected = header.spec.registry()?;
    if registry != expected {
        return Err(HarnessError::Schema(format!(
            "registry {:?} does not match {} ({:?})",
            header.registry,
            header.env,
            expected.table()
        )));
    }
    if header.env != header.spec.tag() {
        return Err(HarnessError::Schema(format!(
            "env tag {:?} does not match spec {:?}",
            header.env,
            header.spec.tag()
        )));
    }

    let mut trajectories: Vec<OpenTrajectory> = Vec::new();
    for (n, text) in lines {
        let text = text.map_err(|e| parse(n, &e))?;
        let line: Line = serde_json::from_str(&text).map_err(|e| parse(n, &e))?;
        let schema = |msg: String| HarnessError::Schema(format!("line {n}: {msg}"));
        let team = TeamId(line.c);
        let members = registry.members(team).map_err(|e| schema(e.to_string()))?;
        let ids: Vec<AgentId> = line.agents.iter().map(|a| a.id).collect();
        if ids != members {
            return Err(schema(format!("agents {ids:?} are not the members {members:?} of team {team}")));
        }
        match trajectories.last_mut() {
            Some(cur) if cur.episode == line.ep => {
                if cur.records.last().is_some_and(|r| r.done) {
                    return Err(schema(format!("episode {} continues after done", line.ep)));
                }
                if line.t != cur.records.len() {
                    return Err(schema(format!("expected t={}, found {}", cur.records.len(), line.t)));
                }
            }
            _ => {
                if line.t != 0 {
                    return Err(schema(format!("episode {} starts at t={}", line.ep, line.t)));
                }
                if trajectories.iter().any(|t| t.episode == line.ep) {
                    return Err(schema(format!("episode {} appears twice", line.ep)));
                }
                trajectories.push(OpenTrajectory::new(line.ep, Vec::new()));
            }
        }
        let state = TeamState {
            team,
            locals: line.agents.iter().map(|a| LocalState(a.s.clone())).collect(),
        };
        let action = TeamAction {
            team,
            actions: line.agents.iter().map(|a| a.a).collect(),
        };
        trajectories.last_mut().expect("pushed above").records.push(Record {
            team,
            state,
            action,
            reward: line.r,
            done: line.done,
        });
    }
    for traj in &trajectories {
        if let Some(v) = validate_trajectory(traj, &registry).first() {
            return Err(HarnessError::Schema(format!("episode {}: {v}", traj.episode)));
        }
    }
    Ok(TrajectoryFile { header, trajectories })
}

pub fn load_trajectories(path: &Path) -> Result<TrajectoryFile, HarnessError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_trajectories(BufReader::new(file))
}

fn registry_of(header: &TrajectoryHeader) -> Result<TeamRegistry, HarnessError> {
    TeamRegistry::from_table(header.spec.agent_count(), &header.registry)
        .map_err(|e| HarnessError::Schema(format!("registry: {e}")))
}
