use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sequence log-probabilities (nats) of a chosen and a rejected response
/// under the policy and the frozen reference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProbPair {
    pub logp_policy_chosen: f64,
    pub logp_ref_chosen: f64,
    pub logp_policy_rejected: f64,
    pub logp_ref_rejected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LossError {
    #[error("beta must be positive and finite, got {0}")]
    Beta(f64),
    #[error("log-probabilities must be finite")]
    NonFinite,
}

impl LogProbPair {
    fn check(&self) -> Result<(), LossError> {
        let all = [self.logp_policy_chosen, self.logp_ref_chosen, self.logp_policy_rejected, self.logp_ref_rejected];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(LossError::NonFinite)
        }
    }
}

/// `β·(log-ratio of chosen − log-ratio of rejected)`, the sigmoid argument.
pub fn dpo_margin(p: &LogProbPair, beta: f64) -> Result<f64, LossError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(LossError::Beta(beta));
    }
    p.check()?;
    let chosen = p.logp_policy_chosen - p.logp_ref_chosen;
    let rejected = p.logp_policy_rejected - p.logp_ref_rejected;
    Ok(beta * chosen - beta * rejected)
}

pub fn dpo_loss(p: &LogProbPair, beta: f64) -> Result<f64, LossError> {
    Ok(softplus(-dpo_margin(p, beta)?))
}

/// `ln(1 + e^x)` without overflow; equals `−ln σ(−x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
