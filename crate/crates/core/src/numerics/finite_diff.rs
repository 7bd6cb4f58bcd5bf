use crate::error::{Error, Result};

/// Central-difference gradient estimate of a scalar function.
///
/// Component `i` is `(f(x + h e_i) - f(x - h e_i)) / (2h)`. This is the
/// independent oracle that every analytic gradient in the crate is checked
/// against; it must never share code with the backpropagation path.
pub fn finite_difference_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Contract(format!(
            "finite_difference_gradient: step {h} must be positive"
        )));
    }
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Oracle(format!(
                "non-finite function value near component {i}: f+ = {fp}, f- = {fm}"
            )));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}
