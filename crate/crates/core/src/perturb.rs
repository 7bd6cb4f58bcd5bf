//! Sensing and actuation disturbances injected between the environment and
//! the policy, per agent.
//!
//! Input perturbations shift the observation the policy sees and never touch
//! the environment's true state. Output perturbations shift the realized
//! actuation after the policy commits to an action; the rollout always logs
//! the commanded action, because a miscalibrated actuator is invisible to
//! the agent that owns it.

use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Which side of the policy the disturbance attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    /// Sensing: added to the observation vector.
    Input,
    /// Actuation: added to the realized action.
    Output,
}

/// Constant offset versus per-step resampled uniform error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Magnitude {
    Fixed { offset: f64 },
    Variable { lo: f64, hi: f64 },
}

/// One agent's disturbance: channel, magnitude, and the components it hits.
///
/// Default masks follow the experimental setup: input errors cover all nine
/// observation elements, output errors only the x displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub channel: Channel,
    pub magnitude: Magnitude,
    pub axis_mask: Vec<bool>,
}

impl PerturbationSpec {
    pub fn fixed_input(offset: f64) -> Self {
        Self {
            channel: Channel::Input,
            magnitude: Magnitude::Fixed { offset },
            axis_mask: vec![true; 9],
        }
    }

    pub fn variable_input(lo: f64, hi: f64) -> Self {
        Self {
            channel: Channel::Input,
            magnitude: Magnitude::Variable { lo, hi },
            axis_mask: vec![true; 9],
        }
    }

    pub fn fixed_output(offset: f64) -> Self {
        Self {
            channel: Channel::Output,
            magnitude: Magnitude::Fixed { offset },
            axis_mask: vec![true, false, false, false],
        }
    }

    pub fn variable_output(lo: f64, hi: f64) -> Self {
        Self {
            channel: Channel::Output,
            magnitude: Magnitude::Variable { lo, hi },
            axis_mask: vec![true, false, false, false],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.channel {
            Channel::Input => 9,
            Channel::Output => 4,
        };
        if self.axis_mask.len() != expected {
            return Err(Error::Config(format!(
                "axis mask length {} != {expected} for {:?} channel",
                self.axis_mask.len(),
                self.channel
            )));
        }
        if !self.axis_mask.iter().any(|&m| m) {
            return Err(Error::Config("axis mask selects no components".into()));
        }
        match self.magnitude {
            Magnitude::Fixed { offset } => {
                if !offset.is_finite() {
                    return Err(Error::Config("fixed offset must be finite".into()));
                }
            }
            Magnitude::Variable { lo, hi } => {
                if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Config(format!("bad interval [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut RngStream) -> Result<f64> {
        match self.magnitude {
            Magnitude::Fixed { offset } => Ok(offset),
            Magnitude::Variable { lo, hi } => rng.sample_uniform(lo, hi),
        }
    }
}

/// Applies a sensing disturbance. Variable errors are resampled per element
/// and per call, so each step of an episode sees fresh noise.
pub fn perturb_observation(
    spec: &PerturbationSpec,
    obs: &Observation,
    rng: &mut RngStream,
) -> Result<Observation> {
    if spec.channel != Channel::Input {
        return Err(Error::Contract(
            "perturb_observation requires an Input-channel spec".into(),
        ));
    }
    let mut out = obs.0;
    for (value, &masked) in out.iter_mut().zip(&spec.axis_mask) {
        if masked {
            *value += spec.draw(rng)?;
        }
    }
    Ok(Observation(out))
}

/// Applies an actuation disturbance to the realized action, before the
/// environment clamps it.
pub fn perturb_action(
    spec: &PerturbationSpec,
    action: &Action,
    rng: &mut RngStream,
) -> Result<Action> {
    if spec.channel != Channel::Output {
        return Err(Error::Contract(
            "perturb_action requires an Output-channel spec".into(),
        ));
    }
    let mut out = action.0;
    for (value, &masked) in out.iter_mut().zip(&spec.axis_mask) {
        if masked {
            *value += spec.draw(rng)?;
        }
    }
    Ok(Action(out))
}

/// A full experimental scenario: which agents carry which disturbance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub code: String,
    pub n_agents: usize,
    pub perturbed_agents: usize,
    pub per_agent_specs: Vec<Option<PerturbationSpec>>,
}

/// Every scenario code, in listing order: the perturbation-free baseline,
/// the twelve {channel}{kind}{count} grid cells, the two large-magnitude
/// variants, and the two per-agent-distinct variants.
pub const SCENARIO_CODES: [&str; 17] = [
    "base", "IF5", "IF15", "IF25", "IV5", "IV15", "IV25", "OF5", "OF15", "OF25", "OV5", "OV15",
    "OV25", "IF15L", "OF15L", "IFD25", "OFD25",
];

/// One-line description per code, used by the CLI listing.
pub fn describe_code(code: &str) -> &'static str {
    match code {
        "base" => "no perturbation on any agent",
        "IF5" => "fixed +0.005 input error on all 9 elements, 5 of 30 agents",
        "IF15" => "fixed +0.005 input error on all 9 elements, 15 of 30 agents",
        "IF25" => "fixed +0.005 input error on all 9 elements, 25 of 30 agents",
        "IV5" => "uniform [0.005, 0.01) input error per element and step, 5 of 30 agents",
        "IV15" => "uniform [0.005, 0.01) input error per element and step, 15 of 30 agents",
        "IV25" => "uniform [0.005, 0.01) input error per element and step, 25 of 30 agents",
        "OF5" => "fixed +0.005 output error on the x axis, 5 of 30 agents",
        "OF15" => "fixed +0.005 output error on the x axis, 15 of 30 agents",
        "OF25" => "fixed +0.005 output error on the x axis, 25 of 30 agents",
        "OV5" => "uniform [0.005, 0.01) output error on the x axis per step, 5 of 30 agents",
        "OV15" => "uniform [0.005, 0.01) output error on the x axis per step, 15 of 30 agents",
        "OV25" => "uniform [0.005, 0.01) output error on the x axis per step, 25 of 30 agents",
        "IF15L" => "large fixed +0.015 input error on all 9 elements, 15 of 30 agents",
        "OF15L" => "large fixed +0.015 output error on the x axis, 15 of 30 agents",
        "IFD25" => "distinct fixed input errors spanning 0.005..0.025, 25 of 30 agents",
        "OFD25" => "distinct fixed output errors spanning 0.005..0.025, 25 of 30 agents",
        _ => "",
    }
}

const SMALL_OFFSET: f64 = 0.005;
const LARGE_OFFSET: f64 = 0.015;
const VARIABLE_LO: f64 = 0.005;
const VARIABLE_HI: f64 = 0.01;
const DISTINCT_LO: f64 = 0.005;
const DISTINCT_HI: f64 = 0.025;

enum CodeKind {
    Shared(PerturbationSpec),
    Distinct(Channel),
}

fn code_table(code: &str) -> Option<(CodeKind, usize)> {
    use CodeKind::*;
    let entry = match code {
        "IF5" => (Shared(PerturbationSpec::fixed_input(SMALL_OFFSET)), 5),
        "IF15" => (Shared(PerturbationSpec::fixed_input(SMALL_OFFSET)), 15),
        "IF25" => (Shared(PerturbationSpec::fixed_input(SMALL_OFFSET)), 25),
        "IV5" => (
            Shared(PerturbationSpec::variable_input(VARIABLE_LO, VARIABLE_HI)),
            5,
        ),
        "IV15" => (
            Shared(PerturbationSpec::variable_input(VARIABLE_LO, VARIABLE_HI)),
            15,
        ),
        "IV25" => (
            Shared(PerturbationSpec::variable_input(VARIABLE_LO, VARIABLE_HI)),
            25,
        ),
        "OF5" => (Shared(PerturbationSpec::fixed_output(SMALL_OFFSET)), 5),
        "OF15" => (Shared(PerturbationSpec::fixed_output(SMALL_OFFSET)), 15),
        "OF25" => (Shared(PerturbationSpec::fixed_output(SMALL_OFFSET)), 25),
        "OV5" => (
            Shared(PerturbationSpec::variable_output(VARIABLE_LO, VARIABLE_HI)),
            5,
        ),
        "OV15" => (
            Shared(PerturbationSpec::variable_output(VARIABLE_LO, VARIABLE_HI)),
            15,
        ),
        "OV25" => (
            Shared(PerturbationSpec::variable_output(VARIABLE_LO, VARIABLE_HI)),
            25,
        ),
        "IF15L" => (Shared(PerturbationSpec::fixed_input(LARGE_OFFSET)), 15),
        "OF15L" => (Shared(PerturbationSpec::fixed_output(LARGE_OFFSET)), 15),
        "IFD25" => (Distinct(Channel::Input), 25),
        "OFD25" => (Distinct(Channel::Output), 25),
        _ => return None,
    };
    Some(entry)
}

/// Number of perturbed agents when running at a team size other than the
/// canonical 30: the fraction is preserved, rounded half-up.
fn scaled_count(count_at_30: usize, n_agents: usize) -> usize {
    if n_agents == 30 {
        count_at_30
    } else {
        ((count_at_30 * n_agents + 15) / 30).min(n_agents)
    }
}

/// Builds the per-agent disturbance assignment for a scenario code.
///
/// The first `perturbed_agents` agents by index carry the disturbance; the
/// distinct variants spread fixed offsets evenly over `[0.005, 0.025]`
/// across the perturbed agents.
pub fn scenario_from_code(code: &str, n_agents: usize) -> Result<ScenarioConfig> {
    if n_agents == 0 {
        return Err(Error::Config("scenario needs at least one agent".into()));
    }
    if code == "base" {
        return Ok(ScenarioConfig {
            code: code.to_string(),
            n_agents,
            perturbed_agents: 0,
            per_agent_specs: vec![None; n_agents],
        });
    }
    let Some((kind, count_at_30)) = code_table(code) else {
        return Err(Error::UnknownScenario {
            code: code.to_string(),
            valid: SCENARIO_CODES.join(", "),
        });
    };
    let k = scaled_count(count_at_30, n_agents);
    let mut specs: Vec<Option<PerturbationSpec>> = Vec::with_capacity(n_agents);
    for i in 0..n_agents {
        if i >= k {
            specs.push(None);
            continue;
        }
        let spec = match &kind {
            CodeKind::Shared(s) => s.clone(),
            CodeKind::Distinct(channel) => {
                let offset = if k <= 1 {
                    DISTINCT_LO
                } else {
                    DISTINCT_LO + i as f64 * (DISTINCT_HI - DISTINCT_LO) / (k - 1) as f64
                };
                match channel {
                    Channel::Input => PerturbationSpec::fixed_input(offset),
                    Channel::Output => PerturbationSpec::fixed_output(offset),
                }
            }
        };
        spec.validate()?;
        specs.push(Some(spec));
    }
    Ok(ScenarioConfig {
        code: code.to_string(),
        n_agents,
        perturbed_agents: k,
        per_agent_specs: specs,
    })
}
