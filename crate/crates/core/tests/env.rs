use odec::env::assembly::{self, AssemblyConfig, AssemblyEnv, Progress};
use odec::env::uff::{self, UffConfig, FIRE_UNITS};
use odec::env::{
    episode_seed, generate_demonstrations, replay, run_episode, EnvSpec, Environment, Mode,
    ScriptedExpert, UffModel,
};
use odec::model::{validate_trajectory, value_iteration, TeamAction, TeamState};
use proptest::prelude::*;

fn uff(agents: usize, mode: Mode) -> EnvSpec {
    EnvSpec::Uff(UffConfig::new(agents, mode))
}

fn asm(mode: Mode) -> EnvSpec {
    EnvSpec::Assembly(AssemblyConfig::new(mode))
}

fn expert_rewards(spec: &EnvSpec, episodes: u64) -> Vec<f64> {
    let expert = ScriptedExpert::new(spec).unwrap();
    let mut env = spec.build().unwrap();
    (0..episodes)
        .map(|ep| {
            let (_, summary) =
                run_episode(env.as_mut(), ep, episode_seed(5, ep), |s| expert.act(s)).unwrap();
            assert!(summary.terminal, "{} episode {ep} did not finish", spec.tag());
            summary.reward
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn open_expert_earns_at_least_closed_expert() {
    for (open, closed) in [
        (uff(2, Mode::Open), uff(2, Mode::Closed)),
        (uff(3, Mode::Open), uff(3, Mode::Closed)),
        (asm(Mode::Open), asm(Mode::Closed)),
    ] {
        let o = mean(&expert_rewards(&open, 100));
        let c = mean(&expert_rewards(&closed, 100));
        assert!(o >= c, "{}: open {o} < closed {c}", open.tag());
    }
}

#[test]
fn uff_expert_calls_from_the_medium_fire() {
    let spec = uff(2, Mode::Open);
    let expert = ScriptedExpert::new(&spec).unwrap();
    let mut env = spec.build().unwrap();
    let mut s = env.reset(0);
    for _ in 0..2 {
        let a = expert.act(&s).unwrap();
        assert_eq!(a.actions, vec![uff::SOUTH]);
        s = env.step(&a).unwrap().state;
    }
    assert_eq!(s.locals[0].values()[0], 6);
    assert_eq!(expert.act(&s).unwrap().actions, vec![uff::CALL_AGENT]);
}

/// Under the designed reward discounted at 0.99, the open expert's single call is
/// exactly optimal: its return matches the value-iteration optimum.
#[test]
fn open_uff_expert_is_optimal_for_the_discounted_designed_reward() {
    let spec = uff(2, Mode::Open);
    let EnvSpec::Uff(config) = &spec else { unreachable!() };
    let model = UffModel::new(config.clone(), 0.99).unwrap();
    let optimum = value_iteration(&model, 1e-10).unwrap().get(&model.start_state()).unwrap();
    let expert = ScriptedExpert::new(&spec).unwrap();
    let mut env = spec.build().unwrap();
    let (traj, _) = run_episode(env.as_mut(), 0, 0, |s| expert.act(s)).unwrap();
    let ret: f64 = traj.records.iter().rev().fold(0.0, |g, r| r.reward + 0.99 * g);
    assert!((ret - optimum).abs() < 1e-6, "expert {ret} vs optimum {optimum}");
}

#[test]
fn uff_calls_precede_multi_agent_extinguishing() {
    for agents in [2, 3] {
        let spec = uff(agents, Mode::Open);
        let expert = ScriptedExpert::new(&spec).unwrap();
        let demos = generate_demonstrations(&spec, &expert, 10_000, 3).unwrap();
        for traj in &demos {
            let first_call = traj
                .records
                .iter()
                .position(|r| r.action.actions.contains(&uff::CALL_AGENT))
                .expect("expert calls an agent");
            let first_joint = traj
                .records
                .iter()
                .position(|r| {
                    r.action.actions.len() > 1 && r.action.actions.contains(&uff::EXTINGUISH)
                })
                .expect("team extinguishes together");
            assert!(first_call < first_joint);
        }
    }
}

#[test]
fn assembly_expert_needs_four_interventions() {
    for mode in [Mode::Open, Mode::Closed] {
        let spec = asm(mode);
        let expert = ScriptedExpert::new(&spec).unwrap();
        let mut env = AssemblyEnv::new(AssemblyConfig::new(mode)).unwrap();
        for ep in 0..100 {
            let (traj, summary) =
                run_episode(&mut env, ep, episode_seed(1, ep), |s| expert.act(s)).unwrap();
            assert!(summary.terminal);
            assert_eq!(env.episode_screws(), 4);
            let screw_steps = traj
                .records
                .iter()
                .filter(|r| r.action.actions.get(1) == Some(&assembly::SCREW_IN))
                .count();
            assert_eq!(screw_steps, 4);
            if mode == Mode::Open {
                assert!(summary.active_steps[1] < summary.active_steps[0]);
                // The call comes exactly one step before the first screwing.
                let call = traj
                    .records
                    .iter()
                    .position(|r| r.action.actions[0] == assembly::CALL_AGENT)
                    .unwrap();
                assert_eq!(
                    traj.records[call + 1].action.actions,
                    vec![assembly::HOLD_IN_PLACE, assembly::SCREW_IN]
                );
            } else {
                assert_eq!(summary.active_steps[1], summary.active_steps[0]);
            }
        }
    }
}

#[test]
fn demonstrations_are_deterministic_valid_and_replayable() {
    for spec in [uff(2, Mode::Open), uff(3, Mode::Closed), asm(Mode::Open)] {
        let expert = ScriptedExpert::new(&spec).unwrap();
        let a = generate_demonstrations(&spec, &expert, 500, 9).unwrap();
        let b = generate_demonstrations(&spec, &expert, 500, 9).unwrap();
        assert_eq!(a, b);
        let steps: usize = a.iter().map(|t| t.horizon()).sum();
        assert!(steps >= 500);
        let mut env = spec.build().unwrap();
        for traj in &a {
            assert!(validate_trajectory(traj, env.registry()).is_empty());
            assert_eq!(&replay(env.as_mut(), traj, 9).unwrap(), traj);
        }
    }
    let spec = uff(2, Mode::Open);
    let expert = ScriptedExpert::new(&spec).unwrap();
    assert!(generate_demonstrations(&spec, &expert, 0, 1).is_err());
    assert!(!generate_demonstrations(&spec, &expert, 50, 1).unwrap().is_empty());
}

fn random_team_action(state: &TeamState, picks: &mut impl Iterator<Item = usize>, n: usize) -> TeamAction {
    TeamAction {
        team: state.team,
        actions: state.locals.iter().map(|_| picks.next().unwrap() % n).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uff_invariants(picks in prop::collection::vec(0usize..6, 400), agents in 2usize..=3) {
        let mut env = uff(agents, Mode::Open).build().unwrap();
        let mut s = env.reset(0);
        let mut picks = picks.into_iter();
        let units = |s: &TeamState| -> Vec<i32> {
            s.locals[0].values()[FIRE_UNITS..FIRE_UNITS + 3].to_vec()
        };
        loop {
            let a = random_team_action(&s, &mut picks, uff::ACTION_COUNT);
            let t = env.step(&a).unwrap();
            let before = units(&s);
            let after = units(&t.state);
            prop_assert!(t.state.locals.len() >= s.locals.len());
            let removed: i32 = before.iter().zip(&after).map(|(b, a)| b - a).sum();
            prop_assert!(before.iter().zip(&after).all(|(b, a)| a <= b && b - a <= agents as i32));
            if t.state.team == s.team {
                // Each extinguish on a burning fire removes exactly one unit.
                let expected: i32 = (0..3).map(|f| {
                    let cell = [2, 6, 8][f];
                    let hits = s.locals.iter().zip(&a.actions)
                        .filter(|(l, &x)| x == uff::EXTINGUISH && l.values()[0] == cell)
                        .count() as i32;
                    hits.min(before[f])
                }).sum();
                prop_assert_eq!(removed, expected);
            } else {
                prop_assert_eq!(removed, 0);
            }
            if t.done {
                break;
            }
            s = t.state;
        }
    }

    #[test]
    fn assembly_invariants(picks in prop::collection::vec(0usize..8, 200), seed in 0u64..1000) {
        let mut env = AssemblyEnv::new(AssemblyConfig::default()).unwrap();
        let mut s = env.reset(seed);
        let mut picks = picks.into_iter();
        loop {
            let a = random_team_action(&s, &mut picks, assembly::ACTION_COUNT);
            let screws = env.episode_screws();
            let t = env.step(&a).unwrap();
            let parts = env.parts();
            // Legs are placed only after their support is screwed.
            for (leg, support) in [(2, 0), (3, 1)] {
                prop_assert!(parts[leg] == Progress::Unplaced || parts[support] == Progress::Screwed);
            }
            if env.episode_screws() > screws {
                prop_assert_eq!(&a.actions, &vec![assembly::HOLD_IN_PLACE, assembly::SCREW_IN]);
            }
            if t.done {
                break;
            }
            s = t.state;
        }
    }
}

#[test]
fn spec_round_trips_through_json() {
    for spec in [uff(3, Mode::Closed), asm(Mode::Open)] {
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EnvSpec>(&text).unwrap(), spec);
    }
    let bad = r#"{"kind":"uff","max_agents":2,"colour":1}"#;
    assert!(serde_json::from_str::<EnvSpec>(bad).is_err());
    let partial: EnvSpec = serde_json::from_str(r#"{"kind":"uff","max_agents":3}"#).unwrap();
    assert_eq!(partial, uff(3, Mode::Open));
}
