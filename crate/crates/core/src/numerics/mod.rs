//! Seeded random-number streams and small dense linear algebra.
//!
//! Everything downstream (networks, environments, the training loop) builds
//! on these primitives. All arithmetic is in `f64`; the networks involved are
//! tiny and the extra precision makes gradient checks unambiguous.

mod finite_diff;
mod matrix;
mod rng;

pub use finite_diff::finite_difference_gradient;
pub use matrix::Matrix;
pub use rng::RngStream;
