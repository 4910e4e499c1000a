#![allow(dead_code)]

use std::collections::HashMap;

use odec::model::{
    DecentralizedPolicy, LocalState, OpenModel, OpenTrajectory, Record, TeamAction, TeamId,
    TeamState,
};

/// Every state of every registered team.
pub fn all_states<M: OpenModel>(model: &M) -> Vec<TeamState> {
    model
        .registry()
        .ids()
        .flat_map(|c| model.team_states(c).unwrap())
        .collect()
}

/// Joint actions built by plain nested counting, independent of the library helper.
pub fn all_actions<M: OpenModel>(model: &M, team: TeamId) -> Vec<TeamAction> {
    let members = model.registry().members(team).unwrap().to_vec();
    let mut out = vec![vec![]];
    for &agent in &members {
        let mut grown = Vec::new();
        for prefix in &out {
            for a in 0..model.action_count(agent) {
                let mut v: Vec<usize> = prefix.clone();
                v.push(a);
                grown.push(v);
            }
        }
        out = grown;
    }
    out.into_iter()
        .map(|actions| TeamAction { team, actions })
        .collect()
}

fn lookup<T: PartialEq>(dist: &[(T, f64)], x: &T) -> f64 {
    dist.iter().filter(|(y, _)| y == x).map(|(_, p)| p).sum()
}

/// P(next | state, action) read straight off Γ and T / T'.
pub fn transition_probability<M: OpenModel>(
    model: &M,
    state: &TeamState,
    action: &TeamAction,
    next: &TeamState,
) -> f64 {
    let gamma = lookup(&model.team_transition(state.team, action), &next.team);
    if gamma == 0.0 {
        return 0.0;
    }
    let t = if next.team == state.team {
        lookup(&model.intra_transition(state, action), next)
    } else {
        lookup(&model.inter_transition(state, next.team), next)
    };
    gamma * t
}

pub fn joint_policy<M: OpenModel, P: DecentralizedPolicy>(
    model: &M,
    policy: &P,
    state: &TeamState,
    action: &TeamAction,
) -> f64 {
    let members = model.registry().members(state.team).unwrap();
    let mut p = 1.0;
    for k in 0..members.len() {
        p *= policy.action_probability(
            members[k],
            state.team,
            &state.locals[k],
            action.actions[k],
        );
    }
    p
}

/// Every trajectory of `len` records together with its probability computed by
/// a forward product over the whole enumeration tree.
pub fn enumerate_trajectories<M: OpenModel, P: DecentralizedPolicy>(
    model: &M,
    policy: &P,
    len: usize,
) -> Vec<(OpenTrajectory, f64)> {
    let states = all_states(model);
    let mut frontier: Vec<(Vec<Record>, f64)> = Vec::new();
    for s in &states {
        let p0 = lookup(&model.prior(), s);
        for a in all_actions(model, s.team) {
            let p = p0 * joint_policy(model, policy, s, &a);
            frontier.push((vec![Record::new(s.clone(), a)], p));
        }
    }
    for _ in 1..len {
        let mut grown = Vec::new();
        for (records, p) in &frontier {
            let last = records.last().unwrap();
            for s in &states {
                let pt = transition_probability(model, &last.state, &last.action, s);
                for a in all_actions(model, s.team) {
                    let mut r = records.clone();
                    r.push(Record::new(s.clone(), a.clone()));
                    grown.push((r, p * pt * joint_policy(model, policy, s, &a)));
                }
            }
        }
        frontier = grown;
    }
    frontier
        .into_iter()
        .map(|(records, p)| (OpenTrajectory::new(0, records), p))
        .collect()
}

/// Finite-horizon expectimax by backward induction over the enumerated states.
pub fn expectimax<M: OpenModel>(model: &M, horizon: usize) -> HashMap<TeamState, f64> {
    let states = all_states(model);
    let gamma = model.discount();
    let mut v: HashMap<TeamState, f64> = states.iter().map(|s| (s.clone(), 0.0)).collect();
    for _ in 0..horizon {
        let mut next = HashMap::new();
        for s in &states {
            if model.is_terminal(s) {
                next.insert(s.clone(), 0.0);
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for a in all_actions(model, s.team) {
                let mut q = model.reward(s, &a);
                for s2 in &states {
                    let p = transition_probability(model, s, &a, s2);
                    if p > 0.0 {
                        q += gamma * p * v[s2];
                    }
                }
                best = best.max(q);
            }
            next.insert(s.clone(), best);
        }
        v = next;
    }
    v
}

pub fn local(v: i32) -> LocalState {
    LocalState(vec![v])
}
