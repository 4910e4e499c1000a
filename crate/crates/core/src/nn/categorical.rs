use rand::Rng;

use super::NnError;

/// Softmax distribution over action logits.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    log_probs: Vec<f64>,
    probs: Vec<f64>,
}

impl Categorical {
    pub fn from_logits(logits: &[f64]) -> Result<Self, NnError> {
        if logits.is_empty() {
            return Err(NnError::EmptyLogits);
        }
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(NnError::NonFiniteLogits);
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        let log_probs: Vec<f64> = logits.iter().map(|z| z - lse).collect();
        let probs = log_probs.iter().map(|l| l.exp()).collect();
        Ok(Self { log_probs, probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs.get(action).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, l)| if *p > 0.0 { p * l } else { 0.0 })
            .sum::<f64>()
    }

    /// Most probable action; ties go to the lowest index.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Inverse-CDF sample from one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left u above the accumulated mass: take the last action with mass.
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// d log p(action) / d logits.
    pub fn log_prob_grad(&self, action: usize) -> Vec<f64> {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| if i == action { 1.0 - p } else { -p })
            .collect()
    }

    /// d H / d logits.
    pub fn entropy_grad(&self) -> Vec<f64> {
        let h = self.entropy();
        self.probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, l)| -p * (l + h))
            .collect()
    }
}

/// Samples an action and returns it with its exact log-probability.
pub fn categorical_head<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> Result<(usize, f64), NnError> {
    let dist = Categorical::from_logits(logits)?;
    let a = dist.sample(rng);
    Ok((a, dist.log_prob(a)))
}
