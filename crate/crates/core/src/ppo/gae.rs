use crate::env::Observation;
use crate::error::{Error, Result};
use crate::ppo::RolloutBatch;

/// Per-transition advantages and value targets, in the batch's flat
/// (agent-major, time-ordered) layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageEstimate {
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// Generalized advantage estimation.
///
/// Per agent, walking time backwards:
/// `delta_t = r_t + gamma (1 - done_t) V(s_{t+1}) - V(s_t)` and
/// `A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}`,
/// bootstrapping the final transition from the agent's trailing observation.
/// The value target is `A_t + V(s_t)`.
pub fn compute_gae<F>(
    batch: &RolloutBatch,
    value_fn: F,
    gamma: f64,
    lambda: f64,
) -> Result<AdvantageEstimate>
where
    F: Fn(&Observation) -> Result<f64>,
{
    if batch.is_empty() {
        return Err(Error::Contract("compute_gae: empty batch".into()));
    }
    if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Contract(
            "compute_gae: gamma and lambda must lie in [0, 1]".into(),
        ));
    }

    let n = batch.num_transitions();
    let mut advantages = Vec::with_capacity(n);
    let mut returns = Vec::with_capacity(n);

    for agent in &batch.agents {
        let t_count = agent.transitions.len();
        if t_count == 0 {
            continue;
        }
        let values: Vec<f64> = agent
            .transitions
            .iter()
            .map(|t| value_fn(&t.obs))
            .collect::<Result<_>>()?;
        let bootstrap = value_fn(&agent.bootstrap_obs)?;

        let mut adv = vec![0.0; t_count];
        let mut carry = 0.0;
        for t in (0..t_count).rev() {
            let transition = &agent.transitions[t];
            let not_done = if transition.done { 0.0 } else { 1.0 };
            let next_value = if t + 1 < t_count {
                values[t + 1]
            } else {
                bootstrap
            };
            let delta = transition.reward + gamma * not_done * next_value - values[t];
            carry = delta + gamma * lambda * not_done * carry;
            adv[t] = carry;
        }
        for (a, v) in adv.iter().zip(&values) {
            if !a.is_finite() {
                return Err(Error::Contract("compute_gae: non-finite advantage".into()));
            }
            advantages.push(*a);
            returns.push(a + v);
        }
    }

    Ok(AdvantageEstimate {
        advantages,
        returns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Action, Observation};
    use crate::numerics::RngStream;
    use crate::ppo::{AgentRollout, Transition};

    fn obs(seed: f64) -> Observation {
        let mut o = [0.0; 9];
        for (i, v) in o.iter_mut().enumerate() {
            *v = (seed + i as f64 * 0.1).sin() * 0.3;
        }
        Observation(o)
    }

    fn transition(reward: f64, done: bool, key: f64) -> Transition {
        Transition {
            obs: obs(key),
            action: Action([0.0; 4]),
            reward,
            old_log_prob: 0.0,
            value: 0.0,
            done,
            agent_id: 0,
        }
    }

    /// Deterministic pseudo-value oracle keyed off the observation.
    fn toy_value(o: &Observation) -> Result<f64> {
        Ok(o.0.iter().sum::<f64>())
    }

    #[test]
    fn single_done_transition_is_reward_minus_value() {
        let batch = RolloutBatch {
            agents: vec![AgentRollout {
                agent_id: 0,
                transitions: vec![transition(3.0, true, 0.4)],
                bootstrap_obs: obs(9.9),
            }],
            snapshot: 0,
        };
        let est = compute_gae(&batch, toy_value, 0.99, 0.95).unwrap();
        let v = toy_value(&batch.agents[0].transitions[0].obs).unwrap();
        assert!((est.advantages[0] - (3.0 - v)).abs() < 1e-15);
        assert!((est.returns[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_zero_is_one_step_td() {
        let mut rng = RngStream::new(3, 0);
        let transitions: Vec<Transition> = (0..20)
            .map(|k| {
                transition(
                    rng.sample_uniform(-5.0, 5.0).unwrap(),
                    k == 19,
                    k as f64 * 0.7,
                )
            })
            .collect();
        let batch = RolloutBatch {
            agents: vec![AgentRollout {
                agent_id: 0,
                transitions,
                bootstrap_obs: obs(44.0),
            }],
            snapshot: 0,
        };
        let gamma = 0.9;
        let est = compute_gae(&batch, toy_value, gamma, 0.0).unwrap();
        let ts = &batch.agents[0].transitions;
        for (t, tr) in ts.iter().enumerate() {
            let v = toy_value(&tr.obs).unwrap();
            let next_v = if tr.done {
                0.0
            } else if t + 1 < ts.len() {
                toy_value(&ts[t + 1].obs).unwrap()
            } else {
                toy_value(&batch.agents[0].bootstrap_obs).unwrap()
            };
            let expected = tr.reward + gamma * (if tr.done { 0.0 } else { next_v }) - v;
            assert!((est.advantages[t] - expected).abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn lambda_one_matches_monte_carlo_returns() {
        // Episodic rollout: advantage + V must equal the brute-force
        // discounted return.
        let mut rng = RngStream::new(7, 1);
        let gamma = 0.99;
        let transitions: Vec<Transition> = (0..50)
            .map(|k| {
                transition(
                    rng.sample_uniform(-10.0, 10.0).unwrap(),
                    k == 49,
                    k as f64 * 0.31,
                )
            })
            .collect();
        let batch = RolloutBatch {
            agents: vec![AgentRollout {
                agent_id: 0,
                transitions,
                bootstrap_obs: obs(5.5),
            }],
            snapshot: 0,
        };
        let est = compute_gae(&batch, toy_value, gamma, 1.0).unwrap();
        let ts = &batch.agents[0].transitions;
        // Independent oracle: discounted sums computed forward.
        for t in 0..ts.len() {
            let mut g = 0.0;
            let mut disc = 1.0;
            for tr in &ts[t..] {
                g += disc * tr.reward;
                disc *= gamma;
                if tr.done {
                    break;
                }
            }
            let v = toy_value(&ts[t].obs).unwrap();
            assert!(
                (est.advantages[t] + v - g).abs() < 1e-10,
                "t = {t}: {} vs {g}",
                est.advantages[t] + v
            );
        }
    }

    #[test]
    fn empty_batch_is_contract_error() {
        let batch = RolloutBatch {
            agents: vec![],
            snapshot: 0,
        };
        assert!(compute_gae(&batch, toy_value, 0.99, 0.95).is_err());
    }

    #[test]
    fn multi_agent_flat_order_is_agent_major() {
        let batch = RolloutBatch {
            agents: vec![
                AgentRollout {
                    agent_id: 0,
                    transitions: vec![transition(1.0, true, 0.1)],
                    bootstrap_obs: obs(1.0),
                },
                AgentRollout {
                    agent_id: 1,
                    transitions: vec![transition(2.0, true, 0.2)],
                    bootstrap_obs: obs(2.0),
                },
            ],
            snapshot: 0,
        };
        let est = compute_gae(&batch, toy_value, 0.99, 0.95).unwrap();
        assert_eq!(est.advantages.len(), 2);
        let v0 = toy_value(&batch.agents[0].transitions[0].obs).unwrap();
        let v1 = toy_value(&batch.agents[1].transitions[0].obs).unwrap();
        assert!((est.advantages[0] - (1.0 - v0)).abs() < 1e-15);
        assert!((est.advantages[1] - (2.0 - v1)).abs() < 1e-15);
    }
}
