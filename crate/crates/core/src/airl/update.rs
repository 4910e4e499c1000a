use super::{logistic, softplus, AirlError, DiscriminatorModel};
use crate::model::{TeamAction, TeamState};
use crate::nn::{Adam, Mlp};

/// One discriminator training example: features, generator log-probability and label
/// (1 for expert, 0 for generator).
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub input: Vec<f64>,
    pub log_pi: f64,
    pub label: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiscriminatorStats {
    /// Mean binary cross-entropy before the step.
    pub loss: f64,
    /// Share of expert samples with D > 1/2.
    pub expert_accuracy: f64,
    /// Share of generator samples with D < 1/2.
    pub generator_accuracy: f64,
}

impl DiscriminatorStats {
    pub fn accuracy(&self) -> f64 {
        0.5 * (self.expert_accuracy + self.generator_accuracy)
    }
}

/// Mean BCE of `D = σ(f - log π)` over `batch` and its gradient with respect to the
/// parameters of `net`.
pub fn bce_loss_and_grad(net: &Mlp, batch: &[Labeled]) -> Result<(Vec<f64>, DiscriminatorStats), AirlError> {
    if batch.is_empty() {
        return Err(AirlError::EmptyBatch);
    }
    let mut grads = vec![0.0; net.param_count()];
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let (mut expert, mut expert_right, mut generator, mut generator_right) = (0usize, 0usize, 0usize, 0usize);
    for s in batch {
        if !s.log_pi.is_finite() {
            return Err(AirlError::NonFiniteInput);
        }
        let (out, cache) = net.forward(&s.input)?;
        let x = out[0] - s.log_pi;
        if !x.is_finite() {
            return Err(AirlError::NonFiniteInput);
        }
        let d = logistic(x);
        loss += s.label * softplus(-x) + (1.0 - s.label) * softplus(x);
        net.backward_into(&cache, &[(d - s.label) / n], &mut grads)?;
        if s.label > 0.5 {
            expert += 1;
            expert_right += usize::from(d > 0.5);
        } else {
            generator += 1;
            generator_right += usize::from(d < 0.5);
        }
    }
    let share = |right: usize, total: usize| if total == 0 { 0.0 } else { right as f64 / total as f64 };
    let stats = DiscriminatorStats {
        loss: loss / n,
        expert_accuracy: share(expert_right, expert),
        generator_accuracy: share(generator_right, generator),
    };
    Ok((grads, stats))
}

/// One Adam step on the BCE with expert samples labelled 1 and generator samples 0.
/// `log_pi` gives the current generator's joint log-probability of a sample.
pub fn discriminator_update<F>(
    model: &mut DiscriminatorModel,
    opt: &mut Adam,
    expert: &[(&TeamState, &TeamAction)],
    generator: &[(&TeamState, &TeamAction)],
    mut log_pi: F,
) -> Result<DiscriminatorStats, AirlError>
where
    F: FnMut(&TeamState, &TeamAction) -> Result<f64, AirlError>,
{
    if expert.is_empty() || generator.is_empty() {
        return Err(AirlError::EmptyBatch);
    }
    let mut batch = Vec::with_capacity(expert.len() + generator.len());
    for (samples, label) in [(expert, 1.0), (generator, 0.0)] {
        for &(s, a) in samples {
            batch.push(Labeled {
                input: model.input(s, a)?,
                log_pi: log_pi(s, a)?,
                label,
            });
        }
    }
    discriminator_step(model, opt, &batch)
}

/// One Adam step on a prepared labelled batch.
pub fn discriminator_step(
    model: &mut DiscriminatorModel,
    opt: &mut Adam,
    batch: &[Labeled],
) -> Result<DiscriminatorStats, AirlError> {
    let (grads, stats) = bce_loss_and_grad(&model.net, batch)?;
    if !stats.loss.is_finite() {
        return Err(AirlError::NonFiniteInput);
    }
    opt.step(model.net.params_mut(), &grads)?;
    Ok(stats)
}
