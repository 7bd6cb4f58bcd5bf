use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::mlp::{init_params, mlp_forward, ForwardCache, MlpParams};
use crate::numerics::RngStream;

/// Width of the sensing vector: gripper pose (6) plus object pose relative
/// to the gripper (3).
pub const OBS_DIM: usize = 9;

/// Width of the action: Cartesian displacement (3) plus wrist rotation (1).
pub const ACTION_DIM: usize = 4;

/// Log density of a diagonal Gaussian at `action`.
pub fn log_prob(mean: &[f64], std: &[f64], action: &[f64]) -> Result<f64> {
    if mean.len() != std.len() || mean.len() != action.len() {
        return Err(Error::Contract(format!(
            "log_prob: length mismatch ({}, {}, {})",
            mean.len(),
            std.len(),
            action.len()
        )));
    }
    let mut lp = 0.0;
    for ((&m, &s), &a) in mean.iter().zip(std).zip(action) {
        if !(s > 0.0) {
            return Err(Error::Contract(format!(
                "log_prob: std {s} must be positive"
            )));
        }
        let z = (a - m) / s;
        lp += -0.5 * (2.0 * PI).ln() - s.ln() - 0.5 * z * z;
    }
    Ok(lp)
}

/// Closed-form `KL(p || q)` between diagonal Gaussians.
pub fn diag_gaussian_kl(
    p_mean: &[f64],
    p_std: &[f64],
    q_mean: &[f64],
    q_std: &[f64],
) -> Result<f64> {
    if p_mean.len() != p_std.len()
        || p_mean.len() != q_mean.len()
        || p_mean.len() != q_std.len()
    {
        return Err(Error::Contract("diag_gaussian_kl: length mismatch".into()));
    }
    let mut kl = 0.0;
    for i in 0..p_mean.len() {
        let (mp, sp, mq, sq) = (p_mean[i], p_std[i], q_mean[i], q_std[i]);
        if !(sp > 0.0) || !(sq > 0.0) {
            return Err(Error::Contract(
                "diag_gaussian_kl: stds must be positive".into(),
            ));
        }
        let d = mp - mq;
        kl += (sq / sp).ln() + (sp * sp + d * d) / (2.0 * sq * sq) - 0.5;
    }
    Ok(kl)
}

/// The policy: an MLP trunk mapping the 9-element observation to 4 action
/// means, plus a state-independent learned log standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicyParams {
    pub trunk: MlpParams,
    pub log_std: Vec<f64>,
}

impl GaussianPolicyParams {
    pub fn new(trunk: MlpParams, log_std: Vec<f64>) -> Result<Self> {
        let p = Self { trunk, log_std };
        p.validate()?;
        Ok(p)
    }

    /// Fresh policy with the given hidden widths. The log-std starts at
    /// `ln(0.5 * action_scale)` per component so initial exploration spans
    /// half the per-step actuation range.
    pub fn init(
        rng: &mut RngStream,
        hidden: &[usize],
        action_scale: &[f64; ACTION_DIM],
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(OBS_DIM);
        sizes.extend_from_slice(hidden);
        sizes.push(ACTION_DIM);
        let trunk = init_params(rng, &sizes)?;
        let log_std = action_scale.iter().map(|s| (0.5 * s).ln()).collect();
        Self::new(trunk, log_std)
    }

    pub fn validate(&self) -> Result<()> {
        self.trunk.validate()?;
        if self.trunk.input_dim() != OBS_DIM || self.trunk.output_dim() != ACTION_DIM {
            return Err(Error::Contract(format!(
                "policy trunk must map {} -> {}, got {} -> {}",
                OBS_DIM,
                ACTION_DIM,
                self.trunk.input_dim(),
                self.trunk.output_dim()
            )));
        }
        if self.log_std.len() != ACTION_DIM || self.log_std.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("policy log_std invalid".into()));
        }
        Ok(())
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|l| l.exp()).collect()
    }

    /// Action mean at an observation (the deterministic evaluation action).
    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(mlp_forward(&self.trunk, obs)?.0)
    }

    pub fn mean_with_cache(&self, obs: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        mlp_forward(&self.trunk, obs)
    }

    /// Samples an action and returns it with its log probability.
    pub fn sample(&self, obs: &[f64], rng: &mut RngStream) -> Result<(Vec<f64>, f64)> {
        let mean = self.mean(obs)?;
        let std = self.std();
        let mut action = Vec::with_capacity(ACTION_DIM);
        for (m, s) in mean.iter().zip(&std) {
            action.push(rng.sample_gaussian(*m, *s)?);
        }
        let lp = log_prob(&mean, &std, &action)?;
        Ok((action, lp))
    }

    pub fn log_prob_of(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        log_prob(&self.mean(obs)?, &self.std(), action)
    }

    pub fn param_count(&self) -> usize {
        self.trunk.param_count() + ACTION_DIM
    }

    /// Trunk parameters followed by the log-std entries.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = self.trunk.flatten();
        flat.extend_from_slice(&self.log_std);
        flat
    }

    pub fn unflatten_into(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Contract(format!(
                "policy unflatten: got {} values, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let split = self.trunk.param_count();
        self.trunk.unflatten_into(&flat[..split])?;
        self.log_std.copy_from_slice(&flat[split..]);
        if self.log_std.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("policy log_std must be finite".into()));
        }
        Ok(())
    }
}

/// The critic: an MLP from the observation to a scalar state value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueParams {
    pub trunk: MlpParams,
}

impl ValueParams {
    pub fn init(rng: &mut RngStream, hidden: &[usize]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(OBS_DIM);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let v = Self {
            trunk: init_params(rng, &sizes)?,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.trunk.validate()?;
        if self.trunk.input_dim() != OBS_DIM || self.trunk.output_dim() != 1 {
            return Err(Error::Contract(format!(
                "value trunk must map {} -> 1, got {} -> {}",
                OBS_DIM,
                self.trunk.input_dim(),
                self.trunk.output_dim()
            )));
        }
        Ok(())
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(mlp_forward(&self.trunk, obs)?.0[0])
    }
}
