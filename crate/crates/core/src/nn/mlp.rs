use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

/// Hidden-layer activation. The output layer is always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
}

/// Parameters of a fully-connected network.
///
/// `weights[l]` maps layer `l` (width `layer_sizes[l]`) to layer `l + 1`;
/// `biases[l]` has the width of layer `l + 1`. Hidden layers apply the
/// activation, the final layer does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub activation: Activation,
}

impl MlpParams {
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[1] * w[0] + w[1])
            .sum()
    }

    /// Flattens all parameters layer by layer: row-major weights, then bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w.data());
            flat.extend_from_slice(b);
        }
        flat
    }

    /// Writes a flat vector (in `flatten` order) back into the parameters.
    pub fn unflatten_into(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Contract(format!(
                "unflatten: got {} values, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract(
                "unflatten: parameters must be finite".into(),
            ));
        }
        let mut offset = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.rows() * w.cols();
            w.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
            let blen = b.len();
            b.copy_from_slice(&flat[offset..offset + blen]);
            offset += blen;
        }
        Ok(())
    }

    fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
        if layer_sizes.len() < 2 {
            return Err(Error::Contract(
                "init_params: need at least input and output layers".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Contract("init_params: zero-width layer".into()));
        }
        Ok(())
    }

    /// All-zero network with the given shape; used by tests and as the
    /// target shape for deserialization checks.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        Self::validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| Matrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_sizes.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation: Activation::Tanh,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::validate_sizes(&self.layer_sizes)?;
        if self.weights.len() != self.layer_sizes.len() - 1
            || self.biases.len() != self.weights.len()
        {
            return Err(Error::Contract("mlp: layer count mismatch".into()));
        }
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if w.rows() != self.layer_sizes[l + 1]
                || w.cols() != self.layer_sizes[l]
                || b.len() != self.layer_sizes[l + 1]
            {
                return Err(Error::Contract(format!("mlp: layer {l} shape mismatch")));
            }
            if b.iter().any(|x| !x.is_finite()) || w.data().iter().any(|x| !x.is_finite()) {
                return Err(Error::Contract(format!(
                    "mlp: layer {l} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }
}

/// Draws fan-in-scaled weights (std `1/sqrt(fan_in)`) and zero biases.
pub fn init_params(rng: &mut RngStream, layer_sizes: &[usize]) -> Result<MlpParams> {
    MlpParams::validate_sizes(layer_sizes)?;
    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for w in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let std = 1.0 / (fan_in as f64).sqrt();
        let mut data = Vec::with_capacity(fan_out * fan_in);
        for _ in 0..fan_out * fan_in {
            data.push(rng.sample_gaussian(0.0, std)?);
        }
        weights.push(Matrix::from_vec(fan_out, fan_in, data)?);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpParams {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        activation: Activation::Tanh,
    })
}

/// Post-activation values of every layer, input included. Enough to run an
/// exact backward pass: tanh' is recoverable from the activation itself.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
}

pub fn mlp_forward(p: &MlpParams, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if x.len() != p.input_dim() {
        return Err(Error::Contract(format!(
            "mlp_forward: input length {} != {}",
            x.len(),
            p.input_dim()
        )));
    }
    let mut activations = Vec::with_capacity(p.num_layers() + 1);
    activations.push(x.to_vec());
    let last = p.num_layers() - 1;
    for (l, (w, b)) in p.weights.iter().zip(&p.biases).enumerate() {
        let mut z = w.matvec(activations.last().expect("non-empty"))?;
        for (zi, bi) in z.iter_mut().zip(b) {
            *zi += bi;
        }
        if l < last {
            for zi in z.iter_mut() {
                *zi = zi.tanh();
            }
        }
        activations.push(z);
    }
    let output = activations.last().expect("non-empty").clone();
    Ok((output, ForwardCache { activations }))
}

/// Gradients of `output . grad_output` with respect to every parameter and
/// to the input.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl MlpGrads {
    pub fn zeros_like(p: &MlpParams) -> Self {
        Self {
            weights: p
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: p.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            input: vec![0.0; p.input_dim()],
        }
    }

    /// Same layout as `MlpParams::flatten`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w.data());
            flat.extend_from_slice(b);
        }
        flat
    }
}

pub fn mlp_backward(p: &MlpParams, cache: &ForwardCache, grad_output: &[f64]) -> Result<MlpGrads> {
    let mut grads = MlpGrads::zeros_like(p);
    mlp_backward_into(p, cache, grad_output, &mut grads)?;
    Ok(grads)
}

/// Accumulating form of `mlp_backward`; the minibatch loops in the learner
/// sum many per-sample gradients into one buffer.
pub fn mlp_backward_into(
    p: &MlpParams,
    cache: &ForwardCache,
    grad_output: &[f64],
    grads: &mut MlpGrads,
) -> Result<()> {
    if cache.activations.len() != p.num_layers() + 1 {
        return Err(Error::Contract(
            "mlp_backward: cache does not match network depth".into(),
        ));
    }
    for (l, a) in cache.activations.iter().enumerate() {
        if a.len() != p.layer_sizes[l] {
            return Err(Error::Contract(format!(
                "mlp_backward: stale cache at layer {l} (width {} != {})",
                a.len(),
                p.layer_sizes[l]
            )));
        }
    }
    if grad_output.len() != p.output_dim() {
        return Err(Error::Contract(format!(
            "mlp_backward: grad_output length {} != {}",
            grad_output.len(),
            p.output_dim()
        )));
    }

    // delta starts at the linear output and walks back through each layer.
    let mut delta = grad_output.to_vec();
    for l in (0..p.num_layers()).rev() {
        let a_in = &cache.activations[l];
        let gw = &mut grads.weights[l];
        for (r, &dr) in delta.iter().enumerate() {
            let row_start = r * gw.cols();
            let row = &mut gw.data_mut()[row_start..row_start + a_in.len()];
            for (g, &ai) in row.iter_mut().zip(a_in) {
                *g += dr * ai;
            }
        }
        for (g, &dr) in grads.biases[l].iter_mut().zip(&delta) {
            *g += dr;
        }
        let mut upstream = p.weights[l].matvec_transpose(&delta)?;
        if l > 0 {
            // a_in holds tanh outputs for hidden layers.
            for (u, &ai) in upstream.iter_mut().zip(a_in) {
                *u *= 1.0 - ai * ai;
            }
        }
        delta = upstream;
    }
    for (g, d) in grads.input.iter_mut().zip(&delta) {
        *g += d;
    }
    Ok(())
}
