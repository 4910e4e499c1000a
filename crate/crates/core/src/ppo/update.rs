use rand::seq::SliceRandom;
use rand::Rng;

use super::{PolicyVector, PpoError, RolloutBuffer, TrainingConfig};
use crate::nn::{clip_grad_norm, Adam, Categorical};

/// Fills in per-episode discounted reward-to-go and baseline-subtracted advantages,
/// normalized over the batch when it has at least two samples.
pub fn compute_targets(buffer: &mut RolloutBuffer, gamma: f64, policies: &PolicyVector) -> Result<(), PpoError> {
    buffer.targets.clear();
    buffer.advantages.clear();
    let n = buffer.steps.len();
    if n == 0 {
        return Ok(());
    }
    if !buffer.steps[n - 1].is_boundary() {
        return Err(PpoError::MalformedBuffer("last step is not an episode boundary".into()));
    }
    for (i, s) in buffer.steps.iter().enumerate() {
        if s.log_probs.len() != s.action.actions.len() || s.action.actions.len() != s.state.locals.len() {
            return Err(PpoError::MalformedBuffer(format!("step {i} has inconsistent lengths")));
        }
        if !s.reward.is_finite() {
            return Err(PpoError::MalformedBuffer(format!("step {i} has a non-finite reward")));
        }
    }
    let mut targets = vec![0.0; n];
    let mut g = 0.0;
    for i in (0..n).rev() {
        let s = &buffer.steps[i];
        g = if s.is_boundary() { s.reward } else { s.reward + gamma * g };
        targets[i] = g;
    }
    let mut adv = Vec::with_capacity(n);
    for (s, &t) in buffer.steps.iter().zip(&targets) {
        adv.push(t - policies.value(&s.state)?);
    }
    normalize(&mut adv);
    buffer.targets = targets;
    buffer.advantages = adv;
    Ok(())
}

/// Shifts to mean 0 and scales to unit variance; a single sample is left alone.
pub fn normalize(xs: &mut [f64]) {
    if xs.len() < 2 {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x -= mean;
        if std > 1e-12 {
            *x /= std;
        }
    }
}

/// Per-sample actor objective and its gradient with respect to the logits.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateTerms {
    /// -min(λA, clip(λ)A)
    pub clip_loss: f64,
    pub entropy: f64,
    pub ratio: f64,
    /// The clipped branch is active, so λ gets no gradient.
    pub clipped: bool,
    /// d(clip_loss - σH) / d logits
    pub grad: Vec<f64>,
}

pub fn surrogate_terms(
    dist: &Categorical,
    action: usize,
    old_log_prob: f64,
    advantage: f64,
    clip: f64,
    entropy_coef: f64,
) -> SurrogateTerms {
    let ratio = (dist.log_prob(action) - old_log_prob).exp();
    let unclipped = ratio * advantage;
    let clipped_value = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    let clipped = clipped_value < unclipped;
    let entropy = dist.entropy();
    let mut grad = vec![0.0; dist.len()];
    if !clipped {
        for (g, lg) in grad.iter_mut().zip(dist.log_prob_grad(action)) {
            *g = -advantage * ratio * lg;
        }
    }
    if entropy_coef != 0.0 {
        for (g, hg) in grad.iter_mut().zip(dist.entropy_grad()) {
            *g -= entropy_coef * hg;
        }
    }
    SurrogateTerms {
        clip_loss: -unclipped.min(clipped_value),
        entropy,
        ratio,
        clipped,
        grad,
    }
}

/// Adam state for every network of a [`PolicyVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizers {
    pub actors: Vec<Adam>,
    pub critic: Adam,
}

impl Optimizers {
    pub fn new(policies: &PolicyVector, config: &TrainingConfig) -> Self {
        Self {
            actors: policies
                .actors
                .iter()
                .map(|a| Adam::new(a.param_count(), config.actor_lr))
                .collect(),
            critic: Adam::new(policies.critic.param_count(), config.critic_lr),
        }
    }
}

/// Means over every sample seen during one update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateReport {
    pub clip_loss: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Samples in which each agent acted (per epoch).
    pub active_samples: Vec<usize>,
    pub value_loss: f64,
    pub clip_fraction: f64,
    pub samples: usize,
}

struct Member {
    agent: usize,
    input: Vec<f64>,
    action: usize,
    old_log_prob: f64,
}

/// `epochs` passes of shuffled minibatch updates over `buffer` (which must carry targets).
pub fn ppo_update<R: Rng + ?Sized>(
    policies: &mut PolicyVector,
    opts: &mut Optimizers,
    buffer: &RolloutBuffer,
    config: &TrainingConfig,
    epochs: usize,
    rng: &mut R,
) -> Result<UpdateReport, PpoError> {
    let agents = policies.agent_count();
    let mut report = UpdateReport {
        clip_loss: vec![0.0; agents],
        entropy: vec![0.0; agents],
        active_samples: vec![0; agents],
        ..Default::default()
    };
    if buffer.is_empty() || epochs == 0 {
        return Ok(report);
    }
    if !buffer.has_targets() {
        return Err(PpoError::MalformedBuffer("targets have not been computed".into()));
    }
    let features = policies.features().clone();
    let mut samples = Vec::with_capacity(buffer.len());
    for step in &buffer.steps {
        let members = features.registry().members(step.state.team)?;
        let mut ms = Vec::with_capacity(members.len());
        for (k, &agent) in members.iter().enumerate() {
            ms.push(Member {
                agent,
                input: features.actor_input(step.state.team, &step.state.locals[k])?,
                action: step.action.actions[k],
                old_log_prob: step.log_probs[k],
            });
        }
        samples.push((ms, features.critic_input(&step.state)?));
    }
    for (ms, _) in &samples {
        for m in ms {
            report.active_samples[m.agent] += 1;
        }
    }

    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut sums = vec![(0.0, 0.0); agents];
    let (mut value_sum, mut clipped, mut decisions) = (0.0, 0usize, 0usize);
    let mut actor_grads: Vec<Vec<f64>> = policies.actors.iter().map(|a| vec![0.0; a.param_count()]).collect();
    let mut critic_grad = vec![0.0; policies.critic.param_count()];
    for _ in 0..epochs {
        order.shuffle(rng);
        for batch in order.chunks(config.minibatch_size) {
            actor_grads.iter_mut().for_each(|g| g.iter_mut().for_each(|x| *x = 0.0));
            critic_grad.iter_mut().for_each(|x| *x = 0.0);
            let mut counts = vec![0usize; agents];
            for &i in batch {
                let advantage = buffer.advantages[i];
                for m in &samples[i].0 {
                    let actor = &policies.actors[m.agent];
                    let (logits, cache) = actor.forward(&m.input)?;
                    let dist = Categorical::from_logits(&logits).map_err(|_| PpoError::NonFiniteLoss)?;
                    let t = surrogate_terms(&dist, m.action, m.old_log_prob, advantage, config.clip, config.entropy_coef);
                    if !(t.clip_loss.is_finite() && t.entropy.is_finite()) {
                        return Err(PpoError::NonFiniteLoss);
                    }
                    actor.backward_into(&cache, &t.grad, &mut actor_grads[m.agent])?;
                    counts[m.agent] += 1;
                    sums[m.agent].0 += t.clip_loss;
                    sums[m.agent].1 += t.entropy;
                    clipped += usize::from(t.clipped);
                    decisions += 1;
                }
                let (v, cache) = policies.critic.forward(&samples[i].1)?;
                let err = v[0] - buffer.targets[i];
                if !err.is_finite() {
                    return Err(PpoError::NonFiniteLoss);
                }
                value_sum += err * err;
                policies.critic.backward_into(&cache, &[2.0 * err], &mut critic_grad)?;
            }
            for (agent, grads) in actor_grads.iter_mut().enumerate() {
                if counts[agent] == 0 {
                    continue;
                }
                let scale = 1.0 / counts[agent] as f64;
                grads.iter_mut().for_each(|g| *g *= scale);
                clip_grad_norm(grads, config.max_grad_norm);
                opts.actors[agent].step(policies.actors[agent].params_mut(), grads)?;
            }
            let scale = 1.0 / batch.len() as f64;
            critic_grad.iter_mut().for_each(|g| *g *= scale);
            clip_grad_norm(&mut critic_grad, config.max_grad_norm);
            opts.critic.step(policies.critic.params_mut(), &critic_grad)?;
        }
    }
    for (agent, (loss, entropy)) in sums.into_iter().enumerate() {
        let n = report.active_samples[agent] * epochs;
        if n > 0 {
            report.clip_loss[agent] = loss / n as f64;
            report.entropy[agent] = entropy / n as f64;
        }
    }
    report.samples = buffer.len();
    report.value_loss = value_sum / (buffer.len() * epochs) as f64;
    report.clip_fraction = if decisions == 0 { 0.0 } else { clipped as f64 / decisions as f64 };
    Ok(report)
}
