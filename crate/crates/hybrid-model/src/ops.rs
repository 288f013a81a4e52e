//! Softmax and cross-entropy with their gradients.

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// -log p_label for a probability vector.
pub fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    -(probs[label].max(1e-300)).ln()
}

/// Gradient of cross_entropy(softmax(logits), label) w.r.t. the logits.
pub fn cross_entropy_grad(probs: &[f64], label: usize) -> Vec<f64> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == label { p - 1.0 } else { p })
        .collect()
}

/// Jacobian-vector product of a softmax row: ds_i = p_i (dp_i - sum_j dp_j p_j).
pub fn softmax_backward(probs: &[f64], upstream: &[f64]) -> Vec<f64> {
    let dot: f64 = probs.iter().zip(upstream).map(|(p, u)| p * u).sum();
    probs
        .iter()
        .zip(upstream)
        .map(|(p, u)| p * (u - dot))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_logits_give_uniform() {
        let p = softmax(&[3.0, 3.0, 3.0, 3.0]);
        for v in &p {
            assert!((v - 0.25).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ln2_closed_form() {
        let p = softmax(&[std::f64::consts::LN_2, 0.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_cross_entropy_is_ln_k() {
        let probs = vec![0.25; 4];
        for label in 0..4 {
            assert!((cross_entropy(&probs, label) - 4.0f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_logits_do_not_overflow() {
        let p = softmax(&[1e3, -1e3, 0.0]);
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ce_grad_matches_finite_difference() {
        let logits = [0.3, -1.2, 0.7];
        let label = 2;
        let grad = cross_entropy_grad(&softmax(&logits), label);
        let h = 1e-6;
        for i in 0..3 {
            let mut lp = logits;
            lp[i] += h;
            let mut lm = logits;
            lm[i] -= h;
            let numeric = (cross_entropy(&softmax(&lp), label)
                - cross_entropy(&softmax(&lm), label))
                / (2.0 * h);
            assert!((grad[i] - numeric).abs() < 1e-6);
        }
    }

    #[test]
    fn softmax_jvp_matches_finite_difference() {
        let logits = [0.1, 0.9, -0.4];
        let upstream = [0.5, -0.2, 1.5];
        let p = softmax(&logits);
        let grad = softmax_backward(&p, &upstream);
        let h = 1e-6;
        for i in 0..3 {
            let mut lp = logits;
            lp[i] += h;
            let mut lm = logits;
            lm[i] -= h;
            let f = |l: &[f64]| -> f64 {
                softmax(l).iter().zip(&upstream).map(|(a, b)| a * b).sum()
            };
            let numeric = (f(&lp) - f(&lm)) / (2.0 * h);
            assert!((grad[i] - numeric).abs() < 1e-6);
        }
    }
}
