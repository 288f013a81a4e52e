//! Dense-matrix reference: builds explicit 2^d x 2^d unitaries with
//! Kronecker products and checks the statevector kernels against them.

use num_complex::Complex64;
use quantum_sim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Matrix = Vec<Vec<Complex64>>;

fn identity(dim: usize) -> Matrix {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn rx_matrix(theta: f64) -> Matrix {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    vec![vec![c, s], vec![s, c]]
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); b[0].len()]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            for j in 0..b[0].len() {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// RX on one wire of a d-qubit register (wire 0 = leftmost Kronecker factor).
fn rx_on_wire(d: usize, wire: usize, theta: f64) -> Matrix {
    let mut m = if wire == 0 { rx_matrix(theta) } else { identity(2) };
    for w in 1..d {
        let factor = if w == wire { rx_matrix(theta) } else { identity(2) };
        m = kron(&m, &factor);
    }
    m
}

/// Dense CNOT as a basis permutation.
fn cnot_matrix(d: usize, control: usize, target: usize) -> Matrix {
    let dim = 1 << d;
    let cmask = 1 << (d - 1 - control);
    let tmask = 1 << (d - 1 - target);
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        let row = if col & cmask != 0 { col ^ tmask } else { col };
        m[row][col] = Complex64::new(1.0, 0.0);
    }
    m
}

fn pqc_matrix(config: &PqcConfig) -> Matrix {
    let d = config.qubits();
    let mut m = identity(1 << d);
    for layer in 0..config.layers() {
        for wire in 0..d {
            m = matmul(&rx_on_wire(d, wire, config.angle(layer, wire)), &m);
        }
        for wire in 0..d - 1 {
            m = matmul(&cnot_matrix(d, wire, wire + 1), &m);
        }
    }
    m
}

fn encode_oracle(x: &[f64]) -> Vec<Complex64> {
    let d = x.len();
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << d];
    v[0] = Complex64::new(1.0, 0.0);
    for (wire, &xi) in x.iter().enumerate() {
        v = matvec(&rx_on_wire(d, wire, -xi), &v);
    }
    v
}

fn max_amp_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn two_qubit_encoding_matches_kronecker_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for _ in 0..50 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let fast = angle_encode(&x).unwrap();
        let oracle = encode_oracle(&x);
        assert!(max_amp_diff(fast.amplitudes(), &oracle) <= 1e-12);
    }
}

#[test]
fn two_qubit_single_layer_matches_dense_product() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..50 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let angles = vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let config = PqcConfig::new(2, 1, angles).unwrap();
        let mut fast = angle_encode(&x).unwrap();
        run_pqc(&mut fast, &config).unwrap();
        let oracle = matvec(&pqc_matrix(&config), &encode_oracle(&x));
        assert!(max_amp_diff(fast.amplitudes(), &oracle) <= 1e-12);
    }
}

#[test]
fn expval_matches_dense_quadratic_form() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..20 {
        let d = 3;
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let angles: Vec<f64> = (0..2 * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let config = PqcConfig::new(d, 2, angles).unwrap();
        let mut state = angle_encode(&x).unwrap();
        run_pqc(&mut state, &config).unwrap();
        for wire in 0..d {
            // <psi| Z_w |psi> computed directly on the dense vector
            let mask = 1 << (d - 1 - wire);
            let dense: f64 = state
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(idx, amp)| {
                    let sign = if idx & mask == 0 { 1.0 } else { -1.0 };
                    sign * amp.norm_sqr()
                })
                .sum();
            assert!((state.expval_z(wire).unwrap() - dense).abs() <= 1e-12);
        }
    }
}

#[test]
fn six_qubit_pipeline_matches_dense_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let d = 6;
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let angles: Vec<f64> = (0..2 * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let config = PqcConfig::new(d, 2, angles).unwrap();

    let fast = quantum_layer_forward(&x, &config).unwrap();

    let final_state = matvec(&pqc_matrix(&config), &encode_oracle(&x));
    for wire in 0..d {
        let mask = 1 << (d - 1 - wire);
        let dense: f64 = final_state
            .iter()
            .enumerate()
            .map(|(idx, amp)| if idx & mask == 0 { amp.norm_sqr() } else { -amp.norm_sqr() })
            .sum();
        assert!((fast[wire] - dense).abs() <= 1e-10);
    }
}

#[test]
fn circuit_followed_by_exact_inverse_recovers_input() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let d = 5;
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let angles: Vec<f64> = (0..3 * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let config = PqcConfig::new(d, 3, angles.clone()).unwrap();

    let start = angle_encode(&x).unwrap();
    let mut state = start.clone();
    run_pqc(&mut state, &config).unwrap();

    // reversed gate order with negated angles
    for layer in (0..config.layers()).rev() {
        for wire in (0..d - 1).rev() {
            state.apply_cnot(wire, wire + 1).unwrap();
        }
        for wire in (0..d).rev() {
            state.apply_rx(wire, -config.angle(layer, wire)).unwrap();
        }
    }
    assert!(max_amp_diff(state.amplitudes(), start.amplitudes()) <= 1e-10);
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let h = 1e-5;
    let mut checked = 0;
    for _ in 0..100 {
        let d = rng.gen_range(1..=4usize);
        let layers = rng.gen_range(1..=2usize);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let angles: Vec<f64> = (0..layers * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let upstream: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let config = PqcConfig::new(d, layers, angles).unwrap();

        let analytic = param_shift_grad(&x, &config, &upstream).unwrap();
        for k in 0..layers * d {
            let f = |delta: f64| -> f64 {
                let out = quantum_layer_forward(&x, &config.with_shifted_angle(k, delta)).unwrap();
                out.iter().zip(&upstream).map(|(o, u)| o * u).sum()
            };
            let numeric = (f(h) - f(-h)) / (2.0 * h);
            let denom = numeric.abs().max(1.0);
            assert!(
                (analytic[k] - numeric).abs() / denom <= 1e-5,
                "grad {k}: analytic {} vs numeric {numeric}",
                analytic[k]
            );
            checked += 1;
        }
    }
    assert!(checked >= 100);
}

#[test]
fn input_gradient_matches_finite_differences() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let h = 1e-5;
    for _ in 0..30 {
        let d = rng.gen_range(1..=4usize);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let angles: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let upstream: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let config = PqcConfig::new(d, 1, angles).unwrap();

        let analytic = param_shift_input_grad(&x, &config, &upstream).unwrap();
        for j in 0..d {
            let f = |delta: f64| -> f64 {
                let mut xs = x.clone();
                xs[j] += delta;
                let out = quantum_layer_forward(&xs, &config).unwrap();
                out.iter().zip(&upstream).map(|(o, u)| o * u).sum()
            };
            let numeric = (f(h) - f(-h)) / (2.0 * h);
            let denom = numeric.abs().max(1.0);
            assert!((analytic[j] - numeric).abs() / denom <= 1e-5);
        }
    }
}
