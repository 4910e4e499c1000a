//! Tabular value iteration over an enumerable open model.

use std::collections::HashMap;

use super::open_model::{joint_actions, successor_distribution, OpenModel};
use super::types::{TeamAction, TeamState};
use super::ModelError;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

const MAX_SWEEPS: usize = 1_000_000;

/// Fixed point of V(s) = max_a R(s, a) + γ Σ Γ(c, a, c') T(s, ·, s') V(s').
#[derive(Clone, Debug)]
pub struct ValueTable {
    values: HashMap<TeamState, f64>,
    pub sweeps: usize,
    pub residual: f64,
}

impl ValueTable {
    pub fn get(&self, state: &TeamState) -> Option<f64> {
        self.values.get(state).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TeamState, &f64)> {
        self.values.iter()
    }
}

struct CompiledAction {
    reward: f64,
    successors: std::ops::Range<usize>,
}

pub fn value_iteration<M: OpenModel + ?Sized>(
    model: &M,
    tolerance: f64,
) -> Result<ValueTable, ModelError> {
    let gamma = model.discount();
    if !(0.0..1.0).contains(&gamma) {
        return Err(ModelError::InvalidParameter(format!(
            "discount {gamma} must lie in [0, 1)"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "tolerance {tolerance} must be positive"
        )));
    }

    let mut states = Vec::new();
    for team in model.registry().ids() {
        states.extend(model.team_states(team)?);
    }
    let index: HashMap<&TeamState, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();

    let mut actions_of: Vec<std::ops::Range<usize>> = Vec::with_capacity(states.len());
    let mut actions: Vec<CompiledAction> = Vec::new();
    let mut successors: Vec<(usize, f64)> = Vec::new();
    let mut terminal = vec![false; states.len()];
    for (i, state) in states.iter().enumerate() {
        let start = actions.len();
        if model.is_terminal(state) {
            terminal[i] = true;
        } else {
            for action in joint_actions(model, state.team)? {
                let first = successors.len();
                for (next, p) in successor_distribution(model, state, &action) {
                    let j = *index.get(&next).ok_or_else(|| {
                        ModelError::UnsupportedModel(format!(
                            "successor {next:?} is missing from the enumerated states"
                        ))
                    })?;
                    successors.push((j, p));
                }
                actions.push(CompiledAction {
                    reward: model.reward(state, &action),
                    successors: first..successors.len(),
                });
            }
        }
        actions_of.push(start..actions.len());
    }

    let mut values = vec![0.0; states.len()];
    let mut next = vec![0.0; states.len()];
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while residual >= tolerance {
        if sweeps == MAX_SWEEPS {
            return Err(ModelError::InvalidParameter(format!(
                "value iteration did not reach tolerance {tolerance} (residual {residual})"
            )));
        }
        residual = 0.0;
        for i in 0..states.len() {
            if terminal[i] {
                next[i] = 0.0;
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for a in &actions[actions_of[i].clone()] {
                let expected: f64 = successors[a.successors.clone()]
                    .iter()
                    .map(|&(j, p)| p * values[j])
                    .sum();
                best = best.max(a.reward + gamma * expected);
            }
            // A non-terminal state without actions keeps value zero.
            if best == f64::NEG_INFINITY {
                best = 0.0;
            }
            residual = residual.max((best - values[i]).abs());
            next[i] = best;
        }
        std::mem::swap(&mut values, &mut next);
        sweeps += 1;
    }

    Ok(ValueTable {
        values: states.into_iter().zip(values).collect(),
        sweeps,
        residual,
    })
}

/// One-step lookahead value of every joint action at `state`.
pub fn q_values<M: OpenModel + ?Sized>(
    model: &M,
    table: &ValueTable,
    state: &TeamState,
) -> Result<Vec<(TeamAction, f64)>, ModelError> {
    let gamma = model.discount();
    joint_actions(model, state.team)?
        .into_iter()
        .map(|action| {
            let mut q = model.reward(state, &action);
            for (next, p) in successor_distribution(model, state, &action) {
                let v = table.get(&next).ok_or_else(|| {
                    ModelError::UnsupportedModel(format!("state {next:?} missing from table"))
                })?;
                q += gamma * p * v;
            }
            Ok((action, q))
        })
        .collect()
}
