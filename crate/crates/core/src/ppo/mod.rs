//! The synchronous PPO learner.
//!
//! Experience from all agents is aggregated under one policy snapshot, the
//! advantage of each transition is estimated with GAE, and the policy
//! ascends the importance-ratio surrogate penalized by the KL divergence
//! from the snapshot policy. The penalty coefficient adapts after every
//! update: measured divergence above the target band doubles it, below
//! halves it.

mod gae;
mod objective;
mod update;

pub use gae::{compute_gae, AdvantageEstimate};
pub use objective::{
    mean_policy_kl, ppo_gradient, ppo_objective, surrogate_gradient, surrogate_objective,
};
pub use update::{update_policy, Learner, UpdateStats};

use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation};
use crate::error::{Error, Result};

/// Largest |log importance ratio| tolerated before an update is aborted.
pub const LOG_RATIO_GUARD: f64 = 20.0;

/// One step of experience as the learner sees it: the (possibly perturbed)
/// observation the policy acted on, the commanded action, and bookkeeping
/// from the collecting snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Observation,
    pub action: Action,
    pub reward: f64,
    pub old_log_prob: f64,
    pub value: f64,
    pub done: bool,
    pub agent_id: usize,
}

/// One agent's slice of a rollout, in time order, plus the observation that
/// follows its last transition (the bootstrap state for GAE).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRollout {
    pub agent_id: usize,
    pub transitions: Vec<Transition>,
    pub bootstrap_obs: Observation,
}

/// Synchronized experience from all agents under one policy snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutBatch {
    pub agents: Vec<AgentRollout>,
    pub snapshot: u64,
}

impl RolloutBatch {
    pub fn num_transitions(&self) -> usize {
        self.agents.iter().map(|a| a.transitions.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_transitions() == 0
    }

    /// Agent-major, time-ordered view; the canonical flat order that
    /// advantage vectors align with.
    pub fn flattened(&self) -> Vec<&Transition> {
        self.agents
            .iter()
            .flat_map(|a| a.transitions.iter())
            .collect()
    }
}

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    /// Discount factor.
    pub gamma: f64,
    /// GAE mixing parameter.
    pub lambda: f64,
    /// Initial KL penalty coefficient.
    pub beta_init: f64,
    /// Divergence the adaptive penalty steers toward.
    pub kl_target: f64,
    /// Optimization passes over each batch.
    pub epochs: usize,
    /// Transitions per gradient step.
    pub minibatch_size: usize,
    pub policy_lr: f64,
    pub value_lr: f64,
    /// Total transitions collected across agents per update.
    pub horizon: usize,
    /// Standardize advantages per batch before the epochs.
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            beta_init: 1.0,
            kl_target: 0.01,
            epochs: 10,
            minibatch_size: 256,
            policy_lr: 3e-4,
            value_lr: 1e-3,
            horizon: 2048,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config("gamma and lambda must lie in [0, 1]".into()));
        }
        if !(self.beta_init > 0.0) || !(self.kl_target > 0.0) {
            return Err(Error::Config("beta and kl_target must be positive".into()));
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.horizon == 0 {
            return Err(Error::Config(
                "epochs, minibatch_size, and horizon must be at least 1".into(),
            ));
        }
        if !(self.policy_lr > 0.0) || !(self.value_lr > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// Adaptive KL penalty rule: double outside 1.5x the target, halve inside
/// target/1.5, clamped to `[1e-4, 1e4]`.
pub fn adapt_beta(beta: f64, measured_kl: f64, kl_target: f64) -> f64 {
    let next = if measured_kl > 1.5 * kl_target {
        beta * 2.0
    } else if measured_kl < kl_target / 1.5 {
        beta / 2.0
    } else {
        beta
    };
    next.clamp(1e-4, 1e4)
}
