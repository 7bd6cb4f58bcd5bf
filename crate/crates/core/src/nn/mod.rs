//! Function approximators: a small MLP with hand-written backpropagation,
//! the diagonal-Gaussian policy head and value head built on it, and Adam.
//!
//! There is no autodiff here on purpose. The networks are two 64-unit tanh
//! layers, the gradients are short chain rules, and every analytic gradient
//! is cross-checked against central finite differences in the tests.

mod adam;
mod gaussian;
mod mlp;

pub use adam::AdamState;
pub use gaussian::{
    diag_gaussian_kl, log_prob, GaussianPolicyParams, ValueParams, ACTION_DIM, OBS_DIM,
};
pub use mlp::{
    init_params, mlp_backward, mlp_forward, Activation, ForwardCache, MlpGrads, MlpParams,
};
