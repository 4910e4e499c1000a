use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    collect_parallel, compute_targets, ppo_update, Optimizers, PolicyVector, PpoError, RolloutBuffer,
    TrainingConfig, UpdateReport,
};
use crate::env::{episode_seed, EnvSpec, Environment};

/// One row of the training curve, written after each update.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    /// Environment steps consumed so far.
    pub step: usize,
    /// Mean designed reward of episodes that finished during the rollout.
    pub mean_episode_reward: Option<f64>,
    pub episodes: usize,
    pub entropy: Vec<f64>,
    pub value_loss: f64,
}

/// Collect/update loop state: policies, optimizers and one environment per worker.
pub struct PpoTrainer {
    pub policies: PolicyVector,
    pub opts: Optimizers,
    pub config: TrainingConfig,
    envs: Vec<Box<dyn Environment>>,
    rng: ChaCha8Rng,
    steps: usize,
    rollouts: u64,
}

impl PpoTrainer {
    /// Builds the environment in `config.mode` (closed mode starts with the full team).
    pub fn new(spec: &EnvSpec, config: &TrainingConfig) -> Result<Self, PpoError> {
        config.validate()?;
        let spec = spec.with_mode(config.mode);
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let policies = PolicyVector::new(&spec, &config.hidden, &mut rng)?;
        let opts = Optimizers::new(&policies, config);
        let envs = (0..config.workers)
            .map(|_| spec.build())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            policies,
            opts,
            config: config.clone(),
            envs,
            rng,
            steps: 0,
            rollouts: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn finished(&self) -> bool {
        self.steps >= self.config.total_steps
    }

    /// Samples `rollout_len` steps with the current policies.
    pub fn collect(&mut self) -> Result<RolloutBuffer, PpoError> {
        let workers = self.envs.len() as u64;
        let seeds: Vec<u64> = (0..workers)
            .map(|w| episode_seed(self.config.seed, self.rollouts * workers + w))
            .collect();
        let buffer = collect_parallel(&self.policies, &mut self.envs, self.config.rollout_len, &seeds)?;
        self.rollouts += 1;
        self.steps += buffer.len();
        Ok(buffer)
    }

    /// Computes targets from the buffer's `reward` field and runs `epochs` PPO epochs.
    pub fn update(&mut self, buffer: &mut RolloutBuffer, epochs: usize) -> Result<UpdateReport, PpoError> {
        compute_targets(buffer, self.config.gamma, &self.policies)?;
        let config = self.config.clone();
        ppo_update(&mut self.policies, &mut self.opts, buffer, &config, epochs, &mut self.rng)
    }

    /// One collect/update round on the designed reward.
    pub fn iterate(&mut self) -> Result<CurvePoint, PpoError> {
        let mut buffer = self.collect()?;
        let report = self.update(&mut buffer, self.config.epochs)?;
        Ok(CurvePoint {
            step: self.steps,
            mean_episode_reward: buffer.mean_episode_reward(),
            episodes: buffer.episodes.len(),
            entropy: report.entropy,
            value_loss: report.value_loss,
        })
    }
}

/// Trains oDec-PPO on the environment's designed reward until `total_steps`.
/// `on_point` sees every curve row as it is produced.
pub fn train_odec_ppo<F>(
    spec: &EnvSpec,
    config: &TrainingConfig,
    mut on_point: F,
) -> Result<(PolicyVector, Vec<CurvePoint>), PpoError>
where
    F: FnMut(&CurvePoint),
{
    let mut trainer = PpoTrainer::new(spec, config)?;
    let mut curve = Vec::new();
    while !trainer.finished() {
        let point = trainer.iterate()?;
        on_point(&point);
        curve.push(point);
    }
    Ok((trainer.policies, curve))
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<(), PpoError> {
    let io = |e: csv::Error| PpoError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let agents = curve.first().map_or(0, |p| p.entropy.len());
    let mut header = vec!["step".to_string(), "mean_episode_reward".into(), "episodes".into(), "value_loss".into()];
    header.extend((0..agents).map(|i| format!("entropy_{i}")));
    w.write_record(&header).map_err(io)?;
    for p in curve {
        let mut row = vec![
            p.step.to_string(),
            p.mean_episode_reward.map(|r| r.to_string()).unwrap_or_default(),
            p.episodes.to_string(),
            p.value_loss.to_string(),
        ];
        row.extend(p.entropy.iter().map(|e| e.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| PpoError::Io(format!("{}: {e}", path.display())))
}
