use super::{AirlError, LearnedReward};
use crate::model::{validate_trajectory, OpenTrajectory, TeamAction, TeamState};

/// Sum of `f - log π` over each trajectory's records.
pub fn evaluate_learned_reward<F>(
    reward: &LearnedReward,
    trajectories: &[OpenTrajectory],
    mut log_pi: F,
) -> Result<Vec<f64>, AirlError>
where
    F: FnMut(&TeamState, &TeamAction) -> Result<f64, AirlError>,
{
    let registry = reward.model().features().registry();
    trajectories
        .iter()
        .map(|traj| {
            if let Some(v) = validate_trajectory(traj, registry).first() {
                return Err(AirlError::InvalidDemonstration(format!("episode {}: {v}", traj.episode)));
            }
            traj.records
                .iter()
                .map(|r| reward.reward(&r.state, &r.action, log_pi(&r.state, &r.action)?))
                .sum()
        })
        .collect()
}

/// Area under the ROC curve for scores where `positives` should rank above
/// `negatives`: P(p > n) + P(p = n) / 2 over all pairs.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Option<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for p in positives {
        for n in negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Some(wins / (positives.len() * negatives.len()) as f64)
}
