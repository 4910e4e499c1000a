use odec::airl::{
    auc, bce_loss_and_grad, discriminator_output, discriminator_step, discriminator_update,
    evaluate_learned_reward, extract_reward, logistic, train_odec_airl, write_diagnostics, AirlConfig, AirlError,
    DiscriminatorModel, Labeled, LearnedReward,
};
use odec::env::{
    episode_seed, generate_demonstrations, run_episode, EnvSpec, Mode, ScriptedExpert, UffConfig,
};
use odec::model::{OpenTrajectory, TeamAction, TeamId};
use odec::nn::{gradient_check, Adam};
use odec::ppo::{PpoTrainer, TrainingConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uff(agents: usize, mode: Mode) -> EnvSpec {
    EnvSpec::Uff(UffConfig::new(agents, mode))
}

fn disc(spec: &EnvSpec, seed: u64) -> DiscriminatorModel {
    DiscriminatorModel::new(spec, &[16, 16], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn random_episodes(spec: &EnvSpec, n: u64, seed: u64) -> Vec<OpenTrajectory> {
    let mut env = spec.build().unwrap();
    (0..n)
        .map(|ep| {
            let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(seed, ep));
            run_episode(env.as_mut(), ep, 0, |s| {
                Ok(TeamAction {
                    team: s.team,
                    actions: s.locals.iter().map(|_| rng.gen_range(0..6)).collect(),
                })
            })
            .unwrap()
            .0
        })
        .collect()
}

fn small_airl(total_steps: usize) -> AirlConfig {
    AirlConfig {
        ppo: TrainingConfig {
            total_steps,
            rollout_len: 256,
            hidden: vec![16],
            seed: 4,
            ..TrainingConfig::default()
        },
        discriminator_hidden: vec![16],
        ..AirlConfig::default()
    }
}

#[test]
fn discriminator_output_examples() {
    assert_eq!(discriminator_output(-1.2, -1.2).unwrap(), 0.5);
    assert!((discriminator_output(20.0, 0.0).unwrap() - 1.0).abs() < 1e-8);
    // e^f / (e^f + π) with f = 1 and π = 1/4.
    let direct = 1f64.exp() / (1f64.exp() + 0.25);
    let d = discriminator_output(1.0, -(4f64.ln())).unwrap();
    assert!((d - direct).abs() < 1e-15);
    assert!((d - 0.9158).abs() < 1e-4, "{d}");
    assert!(matches!(discriminator_output(f64::NAN, 0.0), Err(AirlError::NonFiniteInput)));
    assert!(matches!(extract_reward(0.0, f64::NEG_INFINITY), Err(AirlError::NonFiniteInput)));

    assert_eq!(extract_reward(0.3, 0.3).unwrap(), 0.0);
    assert_eq!(extract_reward(2.5, 0.0).unwrap(), 2.5);
    // Saturated inputs stay strictly inside (0, 1).
    let d = discriminator_output(30.0, -5.0).unwrap();
    assert!(d < 1.0 && d > 0.0);
    assert!(discriminator_output(-700.0, 0.0).unwrap() > 0.0);
}

#[test]
fn reward_equals_log_odds_of_the_discriminator() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let f: f64 = rng.gen_range(-10.0..10.0);
        let log_pi: f64 = rng.gen_range(-10.0..0.0);
        // log D and log(1 - D) from the density-ratio form e^f / (e^f + π).
        let log_norm = (f.exp() + log_pi.exp()).ln();
        let log_odds = (f - log_norm) - (log_pi - log_norm);
        assert!((log_odds - extract_reward(f, log_pi).unwrap()).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn discriminator_output_is_a_probability(f in -1e3f64..1e3, log_pi in -1e3f64..0.0) {
        let d = discriminator_output(f, log_pi).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((logistic(f - log_pi) - d).abs() == 0.0);
    }
}

#[test]
fn bce_gradient_matches_finite_differences() {
    let spec = uff(2, Mode::Open);
    let model = disc(&spec, 2);
    let demos = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 40, 1).unwrap();
    let records: Vec<_> = demos.iter().flat_map(|t| &t.records).collect();
    let sample = |k: usize, label: f64| Labeled {
        input: model.input(&records[k].state, &records[k].action).unwrap(),
        log_pi: -1.0 - 0.3 * k as f64,
        label,
    };
    let batches = [vec![sample(0, 1.0)], vec![sample(5, 0.0)], vec![sample(1, 1.0), sample(3, 0.0), sample(13, 0.0)]];
    for batch in batches {
        let (grads, stats) = bce_loss_and_grad(&model.net, &batch).unwrap();
        let mut probe = model.net.clone();
        let err = gradient_check(model.net.params(), &grads, 1e-5, |p| {
            probe.params_mut().copy_from_slice(p);
            bce_loss_and_grad(&probe, &batch).unwrap().1.loss
        });
        assert!(err < 1e-6, "{err}");
        assert!(stats.loss > 0.0);
    }
    assert!(matches!(bce_loss_and_grad(&model.net, &[]), Err(AirlError::EmptyBatch)));
}

#[test]
fn indistinguishable_classes_settle_at_ln_two() {
    let spec = uff(2, Mode::Open);
    let mut model = disc(&spec, 5);
    let mut opt = Adam::new(model.net.param_count(), 1e-3);
    let demos = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 200, 2).unwrap();
    let samples: Vec<_> = demos.iter().flat_map(|t| &t.records).map(|r| (&r.state, &r.action)).collect();
    let mut loss = 0.0;
    for _ in 0..300 {
        loss = discriminator_update(&mut model, &mut opt, &samples, &samples, |_, _| Ok(-1.5))
            .unwrap()
            .loss;
    }
    assert!((loss - 2f64.ln()).abs() < 0.05, "{loss}");
    assert!(matches!(
        discriminator_update(&mut model, &mut opt, &[], &samples, |_, _| Ok(0.0)),
        Err(AirlError::EmptyBatch)
    ));
}

#[test]
fn disjoint_supports_separate() {
    let spec = uff(2, Mode::Open);
    let mut model = disc(&spec, 6);
    let mut opt = Adam::new(model.net.param_count(), 1e-3);
    let expert = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 100, 2).unwrap();
    let expert: Vec<_> = expert.iter().flat_map(|t| &t.records).map(|r| (&r.state, &r.action)).collect();
    // Generator triples: the same states with every action replaced by WEST, which the
    // expert never plays.
    let west: Vec<_> = expert
        .iter()
        .map(|(s, a)| ((*s).clone(), TeamAction { team: a.team, actions: vec![3; a.actions.len()] }))
        .collect();
    assert!(expert.iter().all(|(_, a)| !a.actions.contains(&3)));
    let generator: Vec<_> = west.iter().map(|(s, a)| (s, a)).collect();
    let mut loss = f64::INFINITY;
    for _ in 0..400 {
        loss = discriminator_update(&mut model, &mut opt, &expert, &generator, |_, _| Ok(-1.79))
            .unwrap()
            .loss;
    }
    assert!(loss < 0.05, "{loss}");
    for (s, a) in &expert {
        assert!(discriminator_output(model.f(s, a).unwrap(), -1.79).unwrap() > 0.9);
    }
    for (s, a) in &generator {
        assert!(discriminator_output(model.f(s, a).unwrap(), -1.79).unwrap() < 0.1);
    }
}

#[test]
fn zero_iterations_return_the_initial_policies() {
    let spec = uff(2, Mode::Open);
    let demos = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 50, 1).unwrap();
    let config = small_airl(0);
    let out = train_odec_airl(&spec, &demos, &config, |_| {}).unwrap();
    let fresh = PpoTrainer::new(&spec, &config.ppo).unwrap();
    assert_eq!(out.policies.actor_fingerprint(), fresh.policies.actor_fingerprint());
    assert!(out.diagnostics.is_empty());
}

#[test]
fn parameters_change_only_in_their_own_phase() {
    let spec = uff(2, Mode::Open);
    let demos = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 300, 1).unwrap();
    let out = train_odec_airl(&spec, &demos, &small_airl(768), |_| {}).unwrap();
    assert_eq!(out.diagnostics.len(), 3);
    for d in &out.diagnostics {
        let f = d.fingerprints;
        assert_ne!(f.discriminator[0], f.discriminator[1]);
        assert_eq!(f.discriminator[1], f.discriminator[2]);
        assert_eq!(f.policy[0], f.policy[1]);
        assert_ne!(f.policy[1], f.policy[2]);
    }
    for w in out.diagnostics.windows(2) {
        assert_eq!(w[0].fingerprints.discriminator[2], w[1].fingerprints.discriminator[0]);
        assert_eq!(w[0].fingerprints.policy[2], w[1].fingerprints.policy[0]);
    }
    assert_eq!(out.reward.fingerprint(), out.diagnostics[2].fingerprints.discriminator[2]);

    // Same seed, same run.
    let again = train_odec_airl(&spec, &demos, &small_airl(768), |_| {}).unwrap();
    assert_eq!(again.diagnostics, out.diagnostics);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diag.csv");
    write_diagnostics(&path, &out.diagnostics).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,step,discriminator_loss,expert_accuracy,generator_accuracy,mean_learned_reward,mean_episode_reward,entropy_0,entropy_1"
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn collapse_detector_halts_training() {
    let spec = uff(2, Mode::Open);
    let mut demos = generate_demonstrations(&spec, &ScriptedExpert::new(&spec).unwrap(), 100, 1).unwrap();
    // Local features no reachable state has, so the classes separate perfectly.
    for r in demos.iter_mut().flat_map(|t| t.records.iter_mut()) {
        for local in &mut r.state.locals {
            local.0.iter_mut().for_each(|x| *x = 40);
        }
    }
    let mut config = small_airl(256 * 40);
    config.discriminator_lr = 1e-2;
    config.collapse_patience = 3;
    let out = train_odec_airl(&spec, &demos, &config, |_| {}).unwrap();
    let at = out.collapsed_at.expect("collapse detected");
    assert_eq!(out.diagnostics.len(), at + 1);
    assert!(at < 39);
    for d in &out.diagnostics[at - 2..] {
        assert_eq!(d.discriminator.accuracy(), 1.0);
    }

    config.collapse_patience = 0;
    config.ppo.total_steps = 256 * 6;
    let out = train_odec_airl(&spec, &demos, &config, |_| {}).unwrap();
    assert_eq!(out.collapsed_at, None);
    assert_eq!(out.diagnostics.len(), 6);
}

#[test]
fn demonstrations_must_fit_the_registry() {
    let open = uff(2, Mode::Open);
    let mut demos = generate_demonstrations(&open, &ScriptedExpert::new(&open).unwrap(), 50, 1).unwrap();
    // The closed registry holds only the full team, so the solo-team records do not fit.
    let mut closed = small_airl(256);
    closed.ppo.mode = Mode::Closed;
    let r = train_odec_airl(&open, &demos, &closed, |_| {});
    assert!(matches!(r, Err(AirlError::InvalidDemonstration(_))));
    demos[0].records[0].state.team = TeamId(9);
    let r = train_odec_airl(&open, &demos, &small_airl(256), |_| {});
    assert!(matches!(r, Err(AirlError::InvalidDemonstration(_))));
    assert!(matches!(train_odec_airl(&open, &[], &small_airl(256), |_| {}), Err(AirlError::EmptyBatch)));
}

#[test]
fn learned_reward_is_pure_and_round_trips() {
    let spec = uff(3, Mode::Open);
    let reward = LearnedReward::freeze(&disc(&spec, 8));
    let trajectories = random_episodes(&spec, 3, 1);
    let scores = |r: &LearnedReward| evaluate_learned_reward(r, &trajectories, |_, _| Ok(-1.0)).unwrap();
    let first = scores(&reward);
    assert_eq!(first, scores(&reward));

    let twins = vec![trajectories[0].clone(), trajectories[0].clone()];
    let s = evaluate_learned_reward(&reward, &twins, |_, _| Ok(-0.5)).unwrap();
    assert_eq!(s[0], s[1]);
    assert!(evaluate_learned_reward(&reward, &[], |_, _| Ok(0.0)).unwrap().is_empty());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reward.json");
    reward.save(&path).unwrap();
    let back = LearnedReward::load(&path).unwrap();
    assert_eq!(back.fingerprint(), reward.fingerprint());
    let again = scores(&back);
    assert!(first.iter().zip(&again).all(|(a, b)| a.to_bits() == b.to_bits()));

    let mut broken = trajectories[0].clone();
    broken.records[0].action.actions.push(0);
    assert!(evaluate_learned_reward(&reward, &[broken], |_, _| Ok(0.0)).is_err());
}

#[test]
fn closed_mode_has_a_constant_team_feature() {
    let spec = uff(3, Mode::Closed);
    let model = disc(&spec, 1);
    assert_eq!(model.features().team_count(), 1);
    for traj in random_episodes(&spec, 2, 3) {
        for r in &traj.records {
            assert_eq!(model.input(&r.state, &r.action).unwrap()[0], 1.0);
        }
    }
}

#[test]
fn auc_cases() {
    assert_eq!(auc(&[3.0, 4.0], &[1.0, 2.0]), Some(1.0));
    assert_eq!(auc(&[1.0], &[1.0]), Some(0.5));
    assert_eq!(auc(&[0.0, 2.0], &[1.0]), Some(0.5));
    assert_eq!(auc(&[], &[1.0]), None);
}

/// When the demonstrator acts uniformly at random there is nothing to imitate beyond
/// entropy, so the generator stays close to uniform.
#[test]
fn random_demonstrator_keeps_the_generator_near_uniform() {
    let spec = uff(2, Mode::Open);
    let demos = random_episodes(&spec, 60, 11);
    let out = train_odec_airl(&spec, &demos, &small_airl(256 * 30), |_| {}).unwrap();
    let uniform = 6f64.ln();
    let last = out.diagnostics.last().unwrap();
    assert!(last.entropy[0] > 0.9 * uniform, "{:?}", last.entropy);
    if last.entropy[1] > 0.0 {
        assert!(last.entropy[1] > 0.9 * uniform, "{:?}", last.entropy);
    }
}

#[test]
fn discriminator_step_rejects_non_finite_log_pi() {
    let spec = uff(2, Mode::Open);
    let mut model = disc(&spec, 1);
    let mut opt = Adam::new(model.net.param_count(), 1e-3);
    let batch = [Labeled { input: vec![0.0; model.features().reward_len()], log_pi: f64::NAN, label: 1.0 }];
    assert!(matches!(discriminator_step(&mut model, &mut opt, &batch), Err(AirlError::NonFiniteInput)));
}
