//! Flat-vector optimizers.

use crate::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }
}

pub fn sgd_step(weights: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if weights.len() != grads.len() {
        return Err(ModelError::Shape(format!(
            "sgd: {} weights vs {} gradients",
            weights.len(),
            grads.len()
        )));
    }
    for (w, g) in weights.iter_mut().zip(grads) {
        *w -= lr * g;
    }
    Ok(())
}

pub fn adam_step(weights: &mut [f64], grads: &[f64], lr: f64, state: &mut AdamState) -> Result<()> {
    if weights.len() != grads.len() || weights.len() != state.m.len() {
        return Err(ModelError::Shape(format!(
            "adam: {} weights vs {} gradients vs {} state entries",
            weights.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let bc1 = 1.0 - BETA1.powi(state.t as i32);
    let bc2 = 1.0 - BETA2.powi(state.t as i32);
    for i in 0..weights.len() {
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * grads[i];
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        weights[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_weights() {
        let mut w = vec![1.0, -2.0, 0.5];
        sgd_step(&mut w, &[0.0; 3], 0.1).unwrap();
        assert_eq!(w, vec![1.0, -2.0, 0.5]);

        let mut state = AdamState::new(3);
        adam_step(&mut w, &[0.0; 3], 0.1, &mut state).unwrap();
        assert_eq!(w, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn sgd_arithmetic() {
        let mut w = vec![1.0];
        sgd_step(&mut w, &[0.5], 0.1).unwrap();
        assert!((w[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_moves_by_about_lr() {
        // with g = 1: m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
        let mut w = vec![0.0];
        let mut state = AdamState::new(1);
        let lr = 1e-3;
        adam_step(&mut w, &[1.0], lr, &mut state).unwrap();
        let expected = -lr * 1.0 / (1.0 + EPS);
        assert!((w[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut w = vec![0.0; 2];
        assert!(sgd_step(&mut w, &[1.0], 0.1).is_err());
        let mut state = AdamState::new(2);
        assert!(adam_step(&mut w, &[1.0], 0.1, &mut state).is_err());
    }
}
