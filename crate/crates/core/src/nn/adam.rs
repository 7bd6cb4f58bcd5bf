use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam optimizer state over one flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update, in place. Adam descends; callers that
    /// maximize pass the negated gradient.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Contract(format!(
                "adam_step: lengths (params {}, grads {}) != state {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_from_rest_leaves_params_unchanged() {
        let mut adam = AdamState::new(3, 1e-3);
        let mut params = vec![1.0, -2.0, 0.5];
        adam.step(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn zero_gradient_decays_moments() {
        let mut adam = AdamState::new(3, 1e-3);
        let mut params = vec![1.0, -2.0, 0.5];
        adam.step(&mut params, &[0.1, 0.1, 0.1]).unwrap();
        let m_before = adam.m.clone();
        let v_before = adam.v.clone();
        adam.step(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        for (a, b) in adam.m.iter().zip(&m_before) {
            assert!(a.abs() < b.abs());
        }
        for (a, b) in adam.v.iter().zip(&v_before) {
            assert!(a.abs() < b.abs());
        }
    }

    #[test]
    fn first_step_is_learning_rate_sized() {
        let mut adam = AdamState::new(4, 1e-3);
        let mut params = vec![0.0; 4];
        adam.step(&mut params, &[1.0; 4]).unwrap();
        for p in params {
            // Bias correction makes the first step lr * g / (|g| + eps).
            assert!((p + 1e-3).abs() < 1e-9, "step was {p}");
        }
    }

    #[test]
    fn deterministic_across_identical_runs() {
        let run = || {
            let mut adam = AdamState::new(2, 3e-4);
            let mut params = vec![0.5, -0.5];
            for k in 0..50 {
                let g = [(k as f64 * 0.1).sin(), (k as f64 * 0.2).cos()];
                adam.step(&mut params, &g).unwrap();
            }
            params
        };
        let a = run();
        let b = run();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut adam = AdamState::new(3, 1e-3);
        let mut params = vec![0.0; 2];
        assert!(adam.step(&mut params, &[0.0; 3]).is_err());
    }

    proptest::proptest! {
        // Permuting the flat vector, stepping, and unpermuting matches
        // stepping the original order: Adam is elementwise.
        #[test]
        fn update_commutes_with_reordering(
            params in proptest::collection::vec(-2.0f64..2.0, 6),
            grads in proptest::collection::vec(-2.0f64..2.0, 6),
            swap_a in 0usize..6,
            swap_b in 0usize..6,
        ) {
            let mut perm: Vec<usize> = (0..6).collect();
            perm.swap(swap_a, swap_b);

            let mut direct = params.clone();
            AdamState::new(6, 1e-3).step(&mut direct, &grads).unwrap();

            let mut permuted: Vec<f64> = perm.iter().map(|&i| params[i]).collect();
            let pgrads: Vec<f64> = perm.iter().map(|&i| grads[i]).collect();
            AdamState::new(6, 1e-3).step(&mut permuted, &pgrads).unwrap();
            let mut unpermuted = vec![0.0; 6];
            for (slot, &i) in perm.iter().enumerate() {
                unpermuted[i] = permuted[slot];
            }
            for i in 0..6 {
                proptest::prop_assert_eq!(direct[i].to_bits(), unpermuted[i].to_bits());
            }
        }
    }
}
