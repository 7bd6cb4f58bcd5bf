use crate::error::{Error, Result};
use crate::nn::{
    diag_gaussian_kl, log_prob, mlp_backward_into, GaussianPolicyParams, MlpGrads, ACTION_DIM,
};
use crate::ppo::{Transition, LOG_RATIO_GUARD};

fn check_alignment(transitions: &[&Transition], advantages: &[f64]) -> Result<()> {
    if transitions.is_empty() {
        return Err(Error::Contract("objective: empty batch".into()));
    }
    if transitions.len() != advantages.len() {
        return Err(Error::Contract(format!(
            "objective: {} transitions vs {} advantages",
            transitions.len(),
            advantages.len()
        )));
    }
    Ok(())
}

fn guarded_log_ratio(lp: f64, transition: &Transition, index: usize) -> Result<f64> {
    let log_ratio = lp - transition.old_log_prob;
    if !log_ratio.is_finite() || log_ratio.abs() > LOG_RATIO_GUARD {
        return Err(Error::NumericalGuard {
            index,
            agent_id: transition.agent_id,
            log_ratio_abs: log_ratio.abs(),
            limit: LOG_RATIO_GUARD,
        });
    }
    Ok(log_ratio)
}

/// Importance-ratio surrogate: the batch mean of
/// `exp(log p(a|s) - old_log_prob) * A`.
pub fn surrogate_objective(
    policy: &GaussianPolicyParams,
    transitions: &[&Transition],
    advantages: &[f64],
) -> Result<f64> {
    check_alignment(transitions, advantages)?;
    let std = policy.std();
    let mut total = 0.0;
    for (i, (t, &adv)) in transitions.iter().zip(advantages).enumerate() {
        let mean = policy.mean(t.obs.as_slice())?;
        let lp = log_prob(&mean, &std, t.action.as_slice())?;
        let log_ratio = guarded_log_ratio(lp, t, i)?;
        total += log_ratio.exp() * adv;
    }
    Ok(total / transitions.len() as f64)
}

/// Surrogate value plus its gradient with respect to the flattened policy
/// (trunk parameters followed by the log-std entries).
pub fn surrogate_gradient(
    policy: &GaussianPolicyParams,
    transitions: &[&Transition],
    advantages: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_alignment(transitions, advantages)?;
    let std = policy.std();
    let n = transitions.len() as f64;
    let mut trunk_grads = MlpGrads::zeros_like(&policy.trunk);
    let mut log_std_grad = [0.0; ACTION_DIM];
    let mut total = 0.0;

    for (i, (t, &adv)) in transitions.iter().zip(advantages).enumerate() {
        let (mean, cache) = policy.mean_with_cache(t.obs.as_slice())?;
        let lp = log_prob(&mean, &std, t.action.as_slice())?;
        let log_ratio = guarded_log_ratio(lp, t, i)?;
        let ratio = log_ratio.exp();
        total += ratio * adv;

        let weight = ratio * adv / n;
        let mut d_mean = [0.0; ACTION_DIM];
        for j in 0..ACTION_DIM {
            let z = (t.action.0[j] - mean[j]) / std[j];
            d_mean[j] = weight * z / std[j];
            log_std_grad[j] += weight * (z * z - 1.0);
        }
        mlp_backward_into(&policy.trunk, &cache, &d_mean, &mut trunk_grads)?;
    }

    let mut flat = trunk_grads.flatten();
    flat.extend_from_slice(&log_std_grad);
    Ok((total / n, flat))
}

/// Batch-state average of the closed-form KL from the snapshot policy to
/// the current one.
pub fn mean_policy_kl(
    old: &GaussianPolicyParams,
    new: &GaussianPolicyParams,
    transitions: &[&Transition],
) -> Result<f64> {
    if transitions.is_empty() {
        return Err(Error::Contract("mean_policy_kl: empty batch".into()));
    }
    let old_std = old.std();
    let new_std = new.std();
    let mut total = 0.0;
    for t in transitions {
        let old_mean = old.mean(t.obs.as_slice())?;
        let new_mean = new.mean(t.obs.as_slice())?;
        total += diag_gaussian_kl(&old_mean, &old_std, &new_mean, &new_std)?;
    }
    Ok(total / transitions.len() as f64)
}

/// The penalized objective: surrogate minus `beta` times the mean policy KL.
pub fn ppo_objective(
    policy: &GaussianPolicyParams,
    old_policy: &GaussianPolicyParams,
    transitions: &[&Transition],
    advantages: &[f64],
    beta: f64,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Contract(format!("ppo_objective: beta {beta} <= 0")));
    }
    let surrogate = surrogate_objective(policy, transitions, advantages)?;
    let kl = mean_policy_kl(old_policy, policy, transitions)?;
    Ok(surrogate - beta * kl)
}

/// Penalized objective plus its gradient with respect to the flattened
/// policy. One forward pass per transition serves both terms.
pub fn ppo_gradient(
    policy: &GaussianPolicyParams,
    old_policy: &GaussianPolicyParams,
    transitions: &[&Transition],
    advantages: &[f64],
    beta: f64,
) -> Result<(f64, Vec<f64>)> {
    check_alignment(transitions, advantages)?;
    if !(beta > 0.0) {
        return Err(Error::Contract(format!("ppo_gradient: beta {beta} <= 0")));
    }
    let std = policy.std();
    let old_std = old_policy.std();
    let n = transitions.len() as f64;
    let mut trunk_grads = MlpGrads::zeros_like(&policy.trunk);
    let mut log_std_grad = [0.0; ACTION_DIM];
    let mut surrogate_total = 0.0;
    let mut kl_total = 0.0;
    let penalty_scale = -beta / n;

    for (i, (t, &adv)) in transitions.iter().zip(advantages).enumerate() {
        let (mean, cache) = policy.mean_with_cache(t.obs.as_slice())?;
        let old_mean = old_policy.mean(t.obs.as_slice())?;

        let lp = log_prob(&mean, &std, t.action.as_slice())?;
        let log_ratio = guarded_log_ratio(lp, t, i)?;
        let ratio = log_ratio.exp();
        surrogate_total += ratio * adv;

        let weight = ratio * adv / n;
        let mut d_mean = [0.0; ACTION_DIM];
        for j in 0..ACTION_DIM {
            let z = (t.action.0[j] - mean[j]) / std[j];
            d_mean[j] = weight * z / std[j];
            log_std_grad[j] += weight * (z * z - 1.0);
        }

        kl_total += diag_gaussian_kl(&old_mean, &old_std, &mean, &std)?;
        for j in 0..ACTION_DIM {
            let diff = mean[j] - old_mean[j];
            let var = std[j] * std[j];
            d_mean[j] += penalty_scale * diff / var;
            log_std_grad[j] +=
                penalty_scale * (1.0 - (old_std[j] * old_std[j] + diff * diff) / var);
        }
        mlp_backward_into(&policy.trunk, &cache, &d_mean, &mut trunk_grads)?;
    }

    let objective = surrogate_total / n - beta * kl_total / n;
    let mut flat = trunk_grads.flatten();
    flat.extend_from_slice(&log_std_grad);
    Ok((objective, flat))
}
