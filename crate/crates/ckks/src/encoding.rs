//! Fixed-point encoding through the inverse canonical embedding.
//!
//! Slot j of a plaintext is the polynomial's value at zeta^(5^j), where
//! zeta is a primitive 2n-th root of unity. Indexing the slots by the
//! multiplicative orbit of 5 makes the automorphism X -> X^(5^r) act as a
//! cyclic rotation of the slot vector. Imaginary parts are forced to zero:
//! only real payloads are supported.

use num_bigint::BigInt;
use num_complex::Complex64;

use ring_arith::{Domain, ResidueRow, RnsPoly};

use crate::cipher::Plaintext;
use crate::context::Context;
use crate::{CkksError, Result};

impl Context {
    /// Encodes up to n/2 reals at the given scale and level.
    pub fn encode_at(&self, values: &[f64], scale_log2: i32, level: usize) -> Result<Plaintext> {
        let n = self.n();
        let slots = self.slot_count();
        if values.len() > slots {
            return Err(CkksError::CapacityExceeded {
                got: values.len(),
                capacity: slots,
            });
        }
        if level > self.top_level() {
            return Err(CkksError::LevelMismatch {
                a: level,
                b: self.top_level(),
            });
        }
        let two_n = 2 * n;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); two_n];
        for (j, &v) in values.iter().enumerate() {
            let idx = self.rot_group()[j];
            spectrum[idx] = Complex64::new(v, 0.0);
            spectrum[two_n - idx] = Complex64::new(v, 0.0); // conjugate slot, real input
        }
        self.fft_fwd().process(&mut spectrum);

        let scale = (scale_log2 as f64).exp2();
        let inv_n = 1.0 / n as f64;
        let moduli = self.level_chain(level)?.moduli();
        let mut rows: Vec<ResidueRow> = moduli
            .iter()
            .map(|&q| ResidueRow {
                q,
                values: Vec::with_capacity(n),
            })
            .collect();
        for k in 0..n {
            let c = (spectrum[k].re * inv_n * scale).round();
            if !c.is_finite() {
                return Err(CkksError::ScaleOverflow {
                    scale: scale_log2,
                    level,
                });
            }
            let c = c as i128;
            for row in rows.iter_mut() {
                let q = row.q as i128;
                row.values.push(c.rem_euclid(q) as u64);
            }
        }
        let poly = RnsPoly::new(n, Domain::Coefficient, rows)?;
        Ok(Plaintext {
            poly,
            scale_log2,
            level,
        })
    }

    /// Encodes at the default scale and the top level.
    pub fn encode(&self, values: &[f64]) -> Result<Plaintext> {
        self.encode_at(values, self.params().scale_log2, self.top_level())
    }

    /// Decodes a plaintext back to n/2 reals.
    pub fn decode(&self, pt: &Plaintext) -> Result<Vec<f64>> {
        pt.poly.expect_domain(Domain::Coefficient)?;
        let n = self.n();
        let crt = self.crt_level(pt.level);
        let scale = (pt.scale_log2 as f64).exp2();

        let mut spectrum = vec![Complex64::new(0.0, 0.0); 2 * n];
        for k in 0..n {
            // CRT-reconstruct the centered integer coefficient.
            let mut acc = BigInt::from(0u8);
            for (row, factor) in pt.poly.rows().iter().zip(&crt.factors) {
                acc += factor * BigInt::from(row.values[k]);
            }
            acc %= &crt.modulus;
            if acc > crt.half_modulus {
                acc -= &crt.modulus;
            }
            let coeff = bigint_to_f64(&acc) / scale;
            spectrum[k] = Complex64::new(coeff, 0.0);
        }
        self.fft_inv().process(&mut spectrum);

        Ok(self
            .rot_group()
            .iter()
            .map(|&idx| spectrum[idx].re)
            .collect())
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    // num-bigint's conversion truncates toward zero, which is fine at the
    // magnitudes involved (error far below the encoding scale).
    let (sign, digits) = x.to_u64_digits();
    let mut value = 0.0f64;
    for &d in digits.iter().rev() {
        value = value * 1.8446744073709552e19 + d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -value,
        _ => value,
    }
}
