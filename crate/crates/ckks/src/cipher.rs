//! Ciphertexts and the homomorphic operation set.

use rand::Rng;

use ring_arith::{poly_add, poly_mul, poly_sub, Domain, RnsPoly};

use crate::context::Context;
use crate::keys::{apply_ksk, restrict_rows, KskKey, PublicKey, SecretKey, ERROR_SIGMA};
use crate::{CkksError, Result};

/// An encoded (not encrypted) vector: polynomial in coefficient domain,
/// tagged with its scale exponent and chain level.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaintext {
    pub poly: RnsPoly,
    pub scale_log2: i32,
    pub level: usize,
}

impl Plaintext {
    /// Drops residue rows to reach a lower level. Exact as long as the
    /// coefficients fit the remaining modulus, which holds for encoded
    /// plaintexts at any supported scale.
    pub fn to_level(&self, level: usize) -> Result<Plaintext> {
        if level > self.level {
            return Err(CkksError::LevelMismatch {
                a: level,
                b: self.level,
            });
        }
        let mut poly = self.poly.clone();
        poly.truncate_rows(level + 1)?;
        Ok(Plaintext {
            poly,
            scale_log2: self.scale_log2,
            level,
        })
    }
}

/// An RLWE ciphertext: 2 parts normally, 3 transiently after a
/// ciphertext-ciphertext product until relinearization.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    /// Polynomial parts in evaluation domain over the level's data primes.
    pub(crate) parts: Vec<RnsPoly>,
    pub scale_log2: i32,
    pub level: usize,
    /// Heuristic headroom in bits; informational only.
    pub noise_budget_bits: f64,
}

impl Ciphertext {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub(crate) fn parts(&self) -> &[RnsPoly] {
        &self.parts
    }

    fn check_binary_compat(&self, other: &Ciphertext) -> Result<()> {
        if self.level != other.level {
            return Err(CkksError::LevelMismatch {
                a: self.level,
                b: other.level,
            });
        }
        if self.scale_log2 != other.scale_log2 {
            return Err(CkksError::ScaleMismatch {
                a: self.scale_log2,
                b: other.scale_log2,
            });
        }
        Ok(())
    }

    fn check_plain_compat(&self, pt: &Plaintext) -> Result<()> {
        if self.level != pt.level {
            return Err(CkksError::LevelMismatch {
                a: self.level,
                b: pt.level,
            });
        }
        Ok(())
    }
}

impl Context {
    /// Encrypts a plaintext under the public key.
    pub fn encrypt<R: Rng>(&self, pt: &Plaintext, pk: &PublicKey, rng: &mut R) -> Result<Ciphertext> {
        if pt.level > self.top_level() {
            return Err(CkksError::LevelMismatch {
                a: pt.level,
                b: self.top_level(),
            });
        }
        let chain = self.level_chain(pt.level)?;
        let rows = pt.level + 1;

        let u = chain.ntt_forward(&ring_arith::sample_ternary(&chain, rng))?;
        let e0 = chain.ntt_forward(&ring_arith::sample_gaussian(&chain, ERROR_SIGMA, rng))?;
        let e1 = chain.ntt_forward(&ring_arith::sample_gaussian(&chain, ERROR_SIGMA, rng))?;
        let m = chain.ntt_forward(&pt.poly)?;

        let b = restrict_rows(&pk.b, rows);
        let a = restrict_rows(&pk.a, rows);
        let c0 = poly_add(&poly_add(&poly_mul(&b, &u)?, &e0)?, &m)?;
        let c1 = poly_add(&poly_mul(&a, &u)?, &e1)?;

        Ok(Ciphertext {
            parts: vec![c0, c1],
            scale_log2: pt.scale_log2,
            level: pt.level,
            noise_budget_bits: self.fresh_noise_budget(pt.level, pt.scale_log2),
        })
    }

    /// Decrypts a 2- or 3-part ciphertext: m = sum_i c_i * s^i.
    pub fn decrypt(&self, ct: &Ciphertext, sk: &SecretKey) -> Result<Plaintext> {
        if ct.parts.len() < 2 || ct.parts.len() > 3 {
            return Err(CkksError::PartCount {
                expected: 2,
                got: ct.parts.len(),
            });
        }
        let chain = self.level_chain(ct.level)?;
        let rows = ct.level + 1;
        let s = restrict_rows(&sk.s, rows);
        let mut acc = ct.parts[0].clone();
        let mut s_power = s.clone();
        for part in &ct.parts[1..] {
            acc = poly_add(&acc, &poly_mul(part, &s_power)?)?;
            s_power = poly_mul(&s_power, &s)?;
        }
        Ok(Plaintext {
            poly: chain.ntt_inverse(&acc)?,
            scale_log2: ct.scale_log2,
            level: ct.level,
        })
    }

    /// Homomorphic addition; operands must agree on scale and level.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        a.check_binary_compat(b)?;
        if a.parts.len() != b.parts.len() {
            return Err(CkksError::PartCount {
                expected: a.parts.len(),
                got: b.parts.len(),
            });
        }
        let parts = a
            .parts
            .iter()
            .zip(&b.parts)
            .map(|(x, y)| poly_add(x, y))
            .collect::<ring_arith::Result<Vec<_>>>()?;
        Ok(Ciphertext {
            parts,
            scale_log2: a.scale_log2,
            level: a.level,
            noise_budget_bits: a.noise_budget_bits.min(b.noise_budget_bits) - 0.1,
        })
    }

    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        a.check_binary_compat(b)?;
        let parts = a
            .parts
            .iter()
            .zip(&b.parts)
            .map(|(x, y)| poly_sub(x, y))
            .collect::<ring_arith::Result<Vec<_>>>()?;
        Ok(Ciphertext {
            parts,
            scale_log2: a.scale_log2,
            level: a.level,
            noise_budget_bits: a.noise_budget_bits.min(b.noise_budget_bits) - 0.1,
        })
    }

    /// Adds an encoded plaintext to part 0.
    pub fn add_plain(&self, ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
        ct.check_plain_compat(pt)?;
        if ct.scale_log2 != pt.scale_log2 {
            return Err(CkksError::ScaleMismatch {
                a: ct.scale_log2,
                b: pt.scale_log2,
            });
        }
        let chain = self.level_chain(ct.level)?;
        let m = chain.ntt_forward(&pt.poly)?;
        let mut parts = ct.parts.clone();
        parts[0] = poly_add(&parts[0], &m)?;
        Ok(Ciphertext {
            parts,
            scale_log2: ct.scale_log2,
            level: ct.level,
            noise_budget_bits: ct.noise_budget_bits - 0.1,
        })
    }

    /// Multiplies by an encoded plaintext. The output scale is the product
    /// of scales; follow with [`Context::rescale`] to restore the base scale.
    pub fn mul_plain(&self, ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
        ct.check_plain_compat(pt)?;
        let new_scale = ct.scale_log2 + pt.scale_log2;
        self.check_scale_capacity(new_scale, ct.level)?;
        let chain = self.level_chain(ct.level)?;
        let m = chain.ntt_forward(&pt.poly)?;
        let parts = ct
            .parts
            .iter()
            .map(|p| poly_mul(p, &m))
            .collect::<ring_arith::Result<Vec<_>>>()?;
        Ok(Ciphertext {
            parts,
            scale_log2: new_scale,
            level: ct.level,
            noise_budget_bits: ct.noise_budget_bits - pt.scale_log2 as f64,
        })
    }

    /// Ciphertext-ciphertext product; emits a 3-part ciphertext that must
    /// be relinearized back to 2 parts.
    pub fn mul(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        a.check_binary_compat(b)?;
        for ct in [a, b] {
            if ct.parts.len() != 2 {
                return Err(CkksError::PartCount {
                    expected: 2,
                    got: ct.parts.len(),
                });
            }
        }
        let new_scale = a.scale_log2 + b.scale_log2;
        self.check_scale_capacity(new_scale, a.level)?;
        let d0 = poly_mul(&a.parts[0], &b.parts[0])?;
        let d1 = poly_add(
            &poly_mul(&a.parts[0], &b.parts[1])?,
            &poly_mul(&a.parts[1], &b.parts[0])?,
        )?;
        let d2 = poly_mul(&a.parts[1], &b.parts[1])?;
        Ok(Ciphertext {
            parts: vec![d0, d1, d2],
            scale_log2: new_scale,
            level: a.level,
            noise_budget_bits: a.noise_budget_bits.min(b.noise_budget_bits)
                - b.scale_log2 as f64,
        })
    }

    /// Folds the third part back into two using the relinearization key.
    pub fn relinearize(&self, ct: &Ciphertext, rlk: &KskKey) -> Result<Ciphertext> {
        if ct.parts.len() != 3 {
            return Err(CkksError::PartCount {
                expected: 3,
                got: ct.parts.len(),
            });
        }
        let chain = self.level_chain(ct.level)?;
        let d2 = chain.ntt_inverse(&ct.parts[2])?;
        let (k0, k1) = apply_ksk(self, &d2, rlk)?;
        Ok(Ciphertext {
            parts: vec![
                poly_add(&ct.parts[0], &k0)?,
                poly_add(&ct.parts[1], &k1)?,
            ],
            scale_log2: ct.scale_log2,
            level: ct.level,
            noise_budget_bits: ct.noise_budget_bits - 1.0,
        })
    }

    /// Drops the level's last prime, dividing the scale by its width.
    pub fn rescale(&self, ct: &Ciphertext) -> Result<Ciphertext> {
        if ct.level == 0 {
            return Err(CkksError::Ring(ring_arith::RingError::LevelExhausted));
        }
        let chain = self.level_chain(ct.level)?;
        let dropped_bits = self.data_prime_bits(ct.level) as i32;
        let lower_chain = self.level_chain(ct.level - 1)?;
        let parts = ct
            .parts
            .iter()
            .map(|p| {
                let coeff = chain.ntt_inverse(p)?;
                let scaled = chain.rescale_drop_prime(&coeff)?;
                lower_chain.ntt_forward(&scaled)
            })
            .collect::<ring_arith::Result<Vec<_>>>()?;
        Ok(Ciphertext {
            parts,
            scale_log2: ct.scale_log2 - dropped_bits,
            level: ct.level - 1,
            noise_budget_bits: ct.noise_budget_bits,
        })
    }

    /// Rotates the slot vector left by `steps` using the matching Galois key.
    pub fn rotate(&self, ct: &Ciphertext, steps: i64, gk: &KskKey) -> Result<Ciphertext> {
        if ct.parts.len() != 2 {
            return Err(CkksError::PartCount {
                expected: 2,
                got: ct.parts.len(),
            });
        }
        let chain = self.level_chain(ct.level)?;
        let g = self.galois_element(steps);
        let c0 = chain.ntt_inverse(&ct.parts[0])?;
        let c1 = chain.ntt_inverse(&ct.parts[1])?;
        let c0g = chain.ntt_forward(&self.apply_automorphism(&c0, g)?)?;
        let c1g = self.apply_automorphism(&c1, g)?;
        let (k0, k1) = apply_ksk(self, &c1g, gk)?;
        Ok(Ciphertext {
            parts: vec![poly_add(&c0g, &k0)?, k1],
            scale_log2: ct.scale_log2,
            level: ct.level,
            noise_budget_bits: ct.noise_budget_bits - 1.0,
        })
    }

    fn check_scale_capacity(&self, scale_log2: i32, level: usize) -> Result<()> {
        let capacity: u32 = self.params().coeff_modulus_bits[..=level].iter().sum();
        // Leave headroom for message spread and noise.
        if scale_log2 + 10 > capacity as i32 {
            return Err(CkksError::ScaleOverflow {
                scale: scale_log2,
                level,
            });
        }
        Ok(())
    }

    fn fresh_noise_budget(&self, level: usize, scale_log2: i32) -> f64 {
        let capacity: u32 = self.params().coeff_modulus_bits[..=level].iter().sum();
        capacity as f64 - scale_log2 as f64 - 10.0
    }
}
