//! Collaborative multi-agent PPO on an analytic robot-arm reaching task,
//! with per-agent sensing and actuation disturbances.
//!
//! A team of agents shares one Gaussian policy. Each agent steps its own
//! environment copy, optionally behind a [`perturb::PerturbationSpec`] that
//! biases what it senses or how it actuates; experience is aggregated
//! synchronously and the shared policy is updated with a KL-penalized
//! importance-ratio objective whose penalty coefficient adapts to the
//! measured divergence. The crate covers the whole loop: numerics, networks
//! with hand-written backpropagation, the environment, disturbance
//! scenarios, the learner, the training orchestrator, and run artifacts.

pub mod env;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod numerics;
pub mod orchestrator;
pub mod perturb;
pub mod ppo;

pub use error::{Error, Result};
