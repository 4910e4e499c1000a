//! Trajectory likelihoods under an open model and a decentralized policy vector.

use super::open_model::{mass_of, DecentralizedPolicy, OpenModel};
use super::types::{OpenTrajectory, Record, TeamAction, TeamState};
use super::ModelError;

/// Individual factors of a two-record likelihood, each in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct StepFactors {
    /// π_i(a^{t+1}_i | c', s^{t+1}_i) for each member of the next team.
    pub next_policy: Vec<f64>,
    /// Γ(c, a^t, c').
    pub team: f64,
    /// T_c(s^t, a^t, s^{t+1}) if the team is unchanged, T'_c(s^t, c', s^{t+1}) otherwise.
    pub state: f64,
    /// π_i(a^t_i | c, s^t_i) for each member of the current team.
    pub policy: Vec<f64>,
    pub team_changed: bool,
}

impl StepFactors {
    pub fn product(&self) -> f64 {
        self.next_policy.iter().product::<f64>()
            * self.team
            * self.state
            * self.policy.iter().product::<f64>()
    }

    pub fn all(&self) -> Vec<f64> {
        let mut v = self.next_policy.clone();
        v.push(self.team);
        v.push(self.state);
        v.extend_from_slice(&self.policy);
        v
    }
}

pub(crate) fn check_record<M: OpenModel + ?Sized>(
    model: &M,
    record: &Record,
) -> Result<(), ModelError> {
    let malformed = |reason: String| ModelError::MalformedRecord(reason);
    if record.state.team != record.team || record.action.team != record.team {
        return Err(malformed(format!(
            "team ids disagree: record {}, state {}, action {}",
            record.team, record.state.team, record.action.team
        )));
    }
    let members = model.registry().members(record.team)?;
    if record.state.locals.len() != members.len() || record.action.actions.len() != members.len()
    {
        return Err(malformed(format!(
            "team {} has {} members but record carries {} locals and {} actions",
            record.team,
            members.len(),
            record.state.locals.len(),
            record.action.actions.len()
        )));
    }
    for (&agent, &a) in members.iter().zip(&record.action.actions) {
        if a >= model.action_count(agent) {
            return Err(malformed(format!("action {a} invalid for agent {agent}")));
        }
    }
    Ok(())
}

/// Product of the members' policy probabilities for one record.
pub fn policy_terms<M, P>(
    model: &M,
    policies: &P,
    state: &TeamState,
    action: &TeamAction,
) -> Result<Vec<f64>, ModelError>
where
    M: OpenModel + ?Sized,
    P: DecentralizedPolicy + ?Sized,
{
    let members = model.registry().members(state.team)?;
    Ok(members
        .iter()
        .zip(&state.locals)
        .zip(&action.actions)
        .map(|((&agent, local), &a)| policies.action_probability(agent, state.team, local, a))
        .collect())
}

/// Γ · T (or Γ · T') linking two consecutive records.
pub fn transition_factors<M: OpenModel + ?Sized>(
    model: &M,
    current: &Record,
    next: &Record,
) -> Result<(f64, f64), ModelError> {
    let gamma = mass_of(
        &model.team_transition(current.team, &current.action),
        &next.team,
    );
    if gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    let state = if next.team == current.team {
        mass_of(
            &model.intra_transition(&current.state, &current.action),
            &next.state,
        )
    } else {
        mass_of(&model.inter_transition(&current.state, next.team), &next.state)
    };
    Ok((gamma, state))
}

pub fn step_factors<M, P>(
    model: &M,
    policies: &P,
    current: &Record,
    next: &Record,
) -> Result<StepFactors, ModelError>
where
    M: OpenModel + ?Sized,
    P: DecentralizedPolicy + ?Sized,
{
    check_record(model, current)?;
    check_record(model, next)?;
    let (team, state) = transition_factors(model, current, next)?;
    Ok(StepFactors {
        next_policy: policy_terms(model, policies, &next.state, &next.action)?,
        team,
        state,
        policy: policy_terms(model, policies, &current.state, &current.action)?,
        team_changed: next.team != current.team,
    })
}

/// Likelihood of two consecutive records with the start prior factored out.
///
/// A team pair that Γ never produces yields 0 rather than an error.
pub fn step_likelihood<M, P>(
    model: &M,
    policies: &P,
    current: &Record,
    next: &Record,
) -> Result<f64, ModelError>
where
    M: OpenModel + ?Sized,
    P: DecentralizedPolicy + ?Sized,
{
    Ok(step_factors(model, policies, current, next)?.product())
}

/// Chain-rule log-likelihood: log ρ(c¹, s¹) plus every policy and transition
/// factor exactly once. Returns `-inf` when any factor vanishes.
pub fn trajectory_log_likelihood<M, P>(
    model: &M,
    policies: &P,
    trajectory: &OpenTrajectory,
) -> Result<f64, ModelError>
where
    M: OpenModel + ?Sized,
    P: DecentralizedPolicy + ?Sized,
{
    let first = trajectory.records.first().ok_or(ModelError::EmptyTrajectory)?;
    for record in &trajectory.records {
        check_record(model, record)?;
    }
    let mut total = mass_of(&model.prior(), &first.state).ln();
    total += log_product(&policy_terms(model, policies, &first.state, &first.action)?);
    for pair in trajectory.records.windows(2) {
        let (team, state) = transition_factors(model, &pair[0], &pair[1])?;
        total += team.ln() + state.ln();
        total += log_product(&policy_terms(
            model,
            policies,
            &pair[1].state,
            &pair[1].action,
        )?);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    Ok(if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    })
}

fn log_product(terms: &[f64]) -> f64 {
    terms.iter().map(|p| p.ln()).sum()
}
