//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the training harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called with arguments that violate its contract
    /// (dimension mismatches, invalid ranges, stepping a finished episode).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration value (or combination of values) is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A scenario code did not parse.
    #[error("unknown scenario code '{code}'; valid codes: {valid}")]
    UnknownScenario { code: String, valid: String },

    /// A test oracle could not produce a usable value.
    #[error("oracle failure: {0}")]
    Oracle(String),

    /// The importance ratio left the trusted numeric range; the update that
    /// observed it is aborted rather than silently clipped.
    #[error(
        "numerical guard tripped: |log ratio| = {log_ratio_abs:.3} > {limit} \
         at transition {index} (agent {agent_id})"
    )]
    NumericalGuard {
        index: usize,
        agent_id: usize,
        log_ratio_abs: f64,
        limit: f64,
    },

    /// A checkpoint file could not be read back.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Reading or writing a run artifact failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
