//! Parameter-shift gradients, exact for RX-generated rotations.

use crate::pqc::{quantum_layer_forward, PqcConfig};
use crate::Result;

const SHIFT: f64 = std::f64::consts::FRAC_PI_2;

/// Gradient of `upstream . quantum_layer_forward(x, config)` with respect
/// to every circuit angle, via [f(θ+π/2) - f(θ-π/2)] / 2.
pub fn param_shift_grad(x: &[f64], config: &PqcConfig, upstream: &[f64]) -> Result<Vec<f64>> {
    let count = config.layers() * config.qubits();
    let mut grad = vec![0.0; count];
    if upstream.iter().all(|&u| u == 0.0) {
        // readout is linear in upstream, so zero in means zero out
        quantum_layer_forward(x, config)?; // still validate shapes
        return Ok(grad);
    }
    for (k, g) in grad.iter_mut().enumerate() {
        let plus = quantum_layer_forward(x, &config.with_shifted_angle(k, SHIFT))?;
        let minus = quantum_layer_forward(x, &config.with_shifted_angle(k, -SHIFT))?;
        *g = upstream
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(u, (p, m))| u * (p - m) / 2.0)
            .sum();
    }
    Ok(grad)
}

/// Gradient with respect to the encoded inputs. The encoding applies
/// RX(-x_j); the two sign flips cancel, leaving the same shift rule
/// directly in x.
pub fn param_shift_input_grad(x: &[f64], config: &PqcConfig, upstream: &[f64]) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; x.len()];
    if upstream.iter().all(|&u| u == 0.0) {
        quantum_layer_forward(x, config)?;
        return Ok(grad);
    }
    for (j, g) in grad.iter_mut().enumerate() {
        let mut xp = x.to_vec();
        xp[j] += SHIFT;
        let mut xm = x.to_vec();
        xm[j] -= SHIFT;
        let plus = quantum_layer_forward(&xp, config)?;
        let minus = quantum_layer_forward(&xm, config)?;
        *g = upstream
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(u, (p, m))| u * (p - m) / 2.0)
            .sum();
    }
    Ok(grad)
}
