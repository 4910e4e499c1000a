use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::airl::{bce_loss_and_grad, DiscriminatorModel, Labeled};
use crate::env::{EnvSpec, Mode, UffConfig};
use crate::model::toy::{ToyModel, ToyPolicy};
use crate::model::{
    joint_actions, q_values, successor_distribution, trajectory_log_likelihood, value_iteration, OpenModel,
    OpenTrajectory, Record, TeamState, DEFAULT_TOLERANCE,
};
use crate::nn::{finite_diff_check, gradient_check};
use crate::ppo::PolicyVector;

/// Worst relative error accepted from a finite-difference comparison.
const GRADIENT_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Likelihood and value oracles on the toy model, then gradient checks on every
/// network architecture the trainers build.
pub fn selftest() -> Result<Vec<Check>, HarnessError> {
    let mut checks = Vec::new();
    let toy = ToyModel::new(0.9);

    let mass = enumerate_mass(&toy, 3)?;
    checks.push(Check::new(
        "toy likelihood sums to one",
        (mass - 1.0).abs() < 1e-6,
        format!("total mass {mass:.12} over length-3 trajectories"),
    ));

    let table = value_iteration(&toy, DEFAULT_TOLERANCE)?;
    let mut residual: f64 = 0.0;
    for (state, v) in table.iter() {
        let best = q_values(&toy, &table, state)?
            .into_iter()
            .map(|(_, q)| q)
            .fold(f64::NEG_INFINITY, f64::max);
        residual = residual.max((best - v).abs());
    }
    checks.push(Check::new(
        "toy value iteration is a Bellman fixed point",
        residual < 1e-6,
        format!("max residual {residual:.3e}"),
    ));

    let specs = [
        EnvSpec::Uff(UffConfig::new(2, Mode::Open)),
        EnvSpec::Uff(UffConfig::new(3, Mode::Open)),
        EnvSpec::Assembly(Default::default()),
    ];
    for spec in &specs {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let policies = PolicyVector::new(spec, &[64, 64], &mut rng)?;
        let disc = DiscriminatorModel::new(spec, &[64, 64], &mut rng)?;
        let mut env = spec.build()?;
        let state = env.reset(0);
        let (action, _) = policies.act(&state, false, &mut rng)?;

        let input = policies.features().actor_input(state.team, &state.locals[0])?;
        let mut worst: f64 = 0.0;
        for actor in &policies.actors {
            worst = worst.max(finite_diff_check(actor, &input, 1e-5)?);
        }
        checks.push(gradient_check_result(format!("{} actors", spec.tag()), worst));
        let err = finite_diff_check(&policies.critic, &policies.features().critic_input(&state)?, 1e-5)?;
        checks.push(gradient_check_result(format!("{} critic", spec.tag()), err));
        let input = disc.input(&state, &action)?;
        let err = finite_diff_check(&disc.net, &input, 1e-5)?;
        checks.push(gradient_check_result(format!("{} reward network", spec.tag()), err));

        let batch = [(1.0, -0.7), (0.0, -2.1), (1.0, -3.0), (0.0, -0.2)].map(|(label, log_pi)| Labeled {
            input: input.clone(),
            log_pi,
            label,
        });
        let (grads, _) = bce_loss_and_grad(&disc.net, &batch)?;
        let mut probe = disc.net.clone();
        let err = gradient_check(disc.net.params(), &grads, 1e-5, |p| {
            probe.params_mut().copy_from_slice(p);
            bce_loss_and_grad(&probe, &batch).map_or(f64::NAN, |(_, s)| s.loss)
        });
        checks.push(gradient_check_result(format!("{} discriminator loss", spec.tag()), err));
    }
    Ok(checks)
}

fn gradient_check_result(name: String, err: f64) -> Check {
    Check::new(name, err < GRADIENT_TOLERANCE, format!("max relative error {err:.3e}"))
}

/// Total probability of every trajectory of `len` records reachable under the toy policy.
fn enumerate_mass(model: &ToyModel, len: usize) -> Result<f64, HarnessError> {
    let mut frontier: Vec<Vec<Record>> = Vec::new();
    for (state, _) in model.prior() {
        for action in joint_actions(model, state.team)? {
            frontier.push(vec![Record::new(state.clone(), action)]);
        }
    }
    for _ in 1..len {
        let mut grown = Vec::new();
        for records in &frontier {
            let last = records.last().expect("non-empty");
            let mut nexts: Vec<TeamState> = Vec::new();
            for (next, _) in successor_distribution(model, &last.state, &last.action) {
                if !nexts.contains(&next) {
                    nexts.push(next);
                }
            }
            for next in nexts {
                for action in joint_actions(model, next.team)? {
                    let mut r = records.clone();
                    r.push(Record::new(next.clone(), action));
                    grown.push(r);
                }
            }
        }
        frontier = grown;
    }
    let mut total = 0.0;
    for records in frontier {
        total += trajectory_log_likelihood(model, &ToyPolicy, &OpenTrajectory::new(0, records))?.exp();
    }
    Ok(total)
}
