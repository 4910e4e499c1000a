use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{discriminator_step, extract_reward, AirlError, DiscriminatorModel, DiscriminatorStats, Labeled, LearnedReward};
use crate::env::{episode_seed, EnvSpec};
use crate::model::{validate_trajectory, OpenTrajectory};
use crate::nn::Adam;
use crate::ppo::{PolicyVector, PpoTrainer, TrainingConfig};

/// oDec-AIRL settings. The generator runs oDec-PPO with `ppo`; `ppo.total_steps`
/// bounds the generator's environment steps.
///
/// `ppo` is not part of the serialized form: config files carry it in its own section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AirlConfig {
    #[serde(skip)]
    pub ppo: TrainingConfig,
    /// Passes over each rollout when training the discriminator.
    pub discriminator_epochs: usize,
    /// PPO epochs on each rollout after the reward is refreshed.
    pub generator_epochs: usize,
    pub discriminator_lr: f64,
    pub discriminator_hidden: Vec<usize>,
    /// Generator samples per discriminator step, paired with as many expert samples.
    pub discriminator_batch: usize,
    /// Halt after this many consecutive iterations at perfect discriminator accuracy;
    /// 0 disables the check.
    pub collapse_patience: usize,
}

impl Default for AirlConfig {
    fn default() -> Self {
        Self {
            ppo: TrainingConfig::default(),
            discriminator_epochs: 2,
            generator_epochs: 4,
            discriminator_lr: 1e-3,
            discriminator_hidden: vec![64, 64],
            discriminator_batch: 64,
            collapse_patience: 50,
        }
    }
}

impl AirlConfig {
    pub fn validate(&self) -> Result<(), AirlError> {
        self.ppo.validate()?;
        if self.discriminator_batch == 0 || !(self.discriminator_lr > 0.0) {
            return Err(AirlError::InvalidConfig(
                "discriminator_batch and discriminator_lr must be positive".into(),
            ));
        }
        if self.discriminator_hidden.iter().any(|&h| h == 0) {
            return Err(AirlError::InvalidConfig("hidden layer widths must be positive".into()));
        }
        Ok(())
    }
}

/// Parameter hashes at the start of an iteration, after the discriminator phase and
/// after the generator phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseFingerprints {
    pub discriminator: [u64; 3],
    pub policy: [u64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationDiagnostics {
    pub iteration: usize,
    /// Generator environment steps consumed so far.
    pub step: usize,
    /// Means over the iteration's discriminator steps.
    pub discriminator: DiscriminatorStats,
    /// Mean extracted reward `f - log π` over the rollout.
    pub mean_learned_reward: f64,
    /// Mean designed reward of episodes finished during the rollout.
    pub mean_episode_reward: Option<f64>,
    pub entropy: Vec<f64>,
    pub fingerprints: PhaseFingerprints,
}

pub struct AirlOutcome {
    pub reward: LearnedReward,
    pub policies: PolicyVector,
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Iteration at which the collapse detector stopped training.
    pub collapsed_at: Option<usize>,
}

/// Adversarial loop: sample with the current policies, train the discriminator on
/// expert vs generated triples, relabel the rollout with `f - log π`, and improve the
/// policies with oDec-PPO on that reward.
pub fn train_odec_airl<F>(
    spec: &EnvSpec,
    expert: &[OpenTrajectory],
    config: &AirlConfig,
    mut on_iteration: F,
) -> Result<AirlOutcome, AirlError>
where
    F: FnMut(&IterationDiagnostics),
{
    config.validate()?;
    let mut trainer = PpoTrainer::new(spec, &config.ppo)?;
    let registry = trainer.policies.features().registry().clone();
    for traj in expert {
        if let Some(v) = validate_trajectory(traj, &registry).first() {
            return Err(AirlError::InvalidDemonstration(format!("episode {}: {v}", traj.episode)));
        }
    }
    let pool: Vec<_> = expert.iter().flat_map(|t| t.records.iter()).collect();
    if pool.is_empty() {
        return Err(AirlError::EmptyBatch);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(config.ppo.seed, u64::MAX));
    let mut disc = DiscriminatorModel::new(trainer.policies.spec(), &config.discriminator_hidden, &mut rng)?;
    let mut disc_opt = Adam::new(disc.net.param_count(), config.discriminator_lr);
    let expert_inputs = pool
        .iter()
        .map(|r| disc.input(&r.state, &r.action))
        .collect::<Result<Vec<_>, _>>()?;

    let mut diagnostics = Vec::new();
    let mut pinned = 0;
    let mut collapsed_at = None;
    let mut iteration = 0;
    while !trainer.finished() {
        let start = (disc.net.fingerprint(), trainer.policies.actor_fingerprint());

        let mut buffer = trainer.collect()?;

        let expert_log_pi = pool
            .iter()
            .map(|r| trainer.policies.log_prob(&r.state, &r.action))
            .collect::<Result<Vec<_>, _>>()?;
        let generated: Vec<Labeled> = buffer
            .steps
            .iter()
            .map(|s| {
                Ok(Labeled {
                    input: disc.input(&s.state, &s.action)?,
                    log_pi: s.log_probs.iter().sum(),
                    label: 0.0,
                })
            })
            .collect::<Result<_, AirlError>>()?;
        let mut order: Vec<usize> = (0..generated.len()).collect();
        let mut sums = DiscriminatorStats::default();
        let mut steps = 0usize;
        for _ in 0..config.discriminator_epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(config.discriminator_batch) {
                let mut batch = Vec::with_capacity(2 * chunk.len());
                for _ in 0..chunk.len() {
                    let k = rng.gen_range(0..pool.len());
                    batch.push(Labeled {
                        input: expert_inputs[k].clone(),
                        log_pi: expert_log_pi[k],
                        label: 1.0,
                    });
                }
                batch.extend(chunk.iter().map(|&i| generated[i].clone()));
                let s = discriminator_step(&mut disc, &mut disc_opt, &batch)?;
                sums.loss += s.loss;
                sums.expert_accuracy += s.expert_accuracy;
                sums.generator_accuracy += s.generator_accuracy;
                steps += 1;
            }
        }
        let after_disc = (disc.net.fingerprint(), trainer.policies.actor_fingerprint());

        let mut learned_sum = 0.0;
        for (step, g) in buffer.steps.iter_mut().zip(&generated) {
            let f = disc.net.predict(&g.input)?[0];
            step.reward = extract_reward(f, g.log_pi)?;
            learned_sum += step.reward;
        }
        let mean_learned_reward = if buffer.is_empty() { 0.0 } else { learned_sum / buffer.len() as f64 };
        let report = trainer.update(&mut buffer, config.generator_epochs)?;
        let end = (disc.net.fingerprint(), trainer.policies.actor_fingerprint());

        let n = steps.max(1) as f64;
        let stats = DiscriminatorStats {
            loss: sums.loss / n,
            expert_accuracy: sums.expert_accuracy / n,
            generator_accuracy: sums.generator_accuracy / n,
        };
        let diag = IterationDiagnostics {
            iteration,
            step: trainer.steps(),
            discriminator: stats,
            mean_learned_reward,
            mean_episode_reward: buffer.mean_episode_reward(),
            entropy: report.entropy,
            fingerprints: PhaseFingerprints {
                discriminator: [start.0, after_disc.0, end.0],
                policy: [start.1, after_disc.1, end.1],
            },
        };
        on_iteration(&diag);
        diagnostics.push(diag);
        iteration += 1;

        pinned = if steps > 0 && stats.accuracy() >= 1.0 { pinned + 1 } else { 0 };
        if config.collapse_patience > 0 && pinned >= config.collapse_patience {
            collapsed_at = Some(iteration - 1);
            break;
        }
    }
    Ok(AirlOutcome {
        reward: LearnedReward::freeze(&disc),
        policies: trainer.policies,
        diagnostics,
        collapsed_at,
    })
}

pub fn write_diagnostics(path: &Path, rows: &[IterationDiagnostics]) -> Result<(), AirlError> {
    let io = |e: csv::Error| AirlError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let agents = rows.first().map_or(0, |r| r.entropy.len());
    let mut header: Vec<String> = [
        "iteration",
        "step",
        "discriminator_loss",
        "expert_accuracy",
        "generator_accuracy",
        "mean_learned_reward",
        "mean_episode_reward",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..agents).map(|i| format!("entropy_{i}")));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut row = vec![
            r.iteration.to_string(),
            r.step.to_string(),
            r.discriminator.loss.to_string(),
            r.discriminator.expert_accuracy.to_string(),
            r.discriminator.generator_accuracy.to_string(),
            r.mean_learned_reward.to_string(),
            r.mean_episode_reward.map(|x| x.to_string()).unwrap_or_default(),
        ];
        row.extend(r.entropy.iter().map(|e| e.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| AirlError::Io(format!("{}: {e}", path.display())))
}
