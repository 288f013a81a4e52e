//! Precomputed context: prime chains, NTT tables, encoder plans, CRT data.

use std::sync::Arc;

use num_bigint::BigInt;
use rustfft::{Fft, FftDirection, FftPlanner};
use sha2::{Digest, Sha256};

use ring_arith::{inv_mod, Chain, Domain, RnsPoly};

use crate::params::CkksParams;
use crate::{CkksError, Result};

/// Immutable CKKS context; freely shareable across threads.
pub struct Context {
    params: CkksParams,
    /// All primes, data first, key-switching prime last.
    key_chain: Chain,
    /// Data primes only.
    data_chain: Chain,
    /// For each level l: chain [q_0..q_l, p_ks] used during key switching.
    ks_chains: Vec<Chain>,
    /// p_ks mod q_i and p_ks^{-1} mod q_i per data prime.
    p_mod_qi: Vec<u64>,
    p_inv_qi: Vec<u64>,
    /// Per-level CRT reconstruction data for decoding.
    crt: Vec<CrtLevel>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    /// Slot j reads the evaluation at the (5^j mod 2n)-th root of unity.
    rot_group: Vec<usize>,
    fingerprint: u64,
}

pub(crate) struct CrtLevel {
    pub modulus: BigInt,
    pub half_modulus: BigInt,
    /// factor_i = (Q/q_i) * ((Q/q_i)^{-1} mod q_i)
    pub factors: Vec<BigInt>,
}

impl Context {
    pub fn new(params: CkksParams) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let key_chain = Chain::generate(n, &params.coeff_modulus_bits)?;
        let data_len = params.data_prime_count();
        let data_chain = key_chain.prefix(data_len)?;
        let special = key_chain.prime(key_chain.len() - 1).clone();

        let mut ks_chains = Vec::with_capacity(data_len);
        for level in 0..data_len {
            let mut primes = key_chain.primes()[..=level].to_vec();
            primes.push(special.clone());
            ks_chains.push(Chain::new(primes)?);
        }

        let p_ks = special.q();
        let p_mod_qi: Vec<u64> = data_chain.moduli().iter().map(|&q| p_ks % q).collect();
        let p_inv_qi: Vec<u64> = data_chain
            .moduli()
            .iter()
            .zip(&p_mod_qi)
            .map(|(&q, &pm)| inv_mod(pm, q))
            .collect();

        let mut crt = Vec::with_capacity(data_len);
        for level in 0..data_len {
            let moduli = &data_chain.moduli()[..=level];
            let modulus: BigInt = moduli.iter().map(|&q| BigInt::from(q)).product();
            let factors = moduli
                .iter()
                .map(|&q| {
                    let quotient = &modulus / BigInt::from(q);
                    let q_big = BigInt::from(q);
                    let rem = (&quotient % &q_big + &q_big) % &q_big;
                    let rem_u64 = u64::try_from(rem).expect("residue fits u64");
                    &quotient * BigInt::from(inv_mod(rem_u64, q))
                })
                .collect();
            crt.push(CrtLevel {
                half_modulus: &modulus >> 1,
                modulus,
                factors,
            });
        }

        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft(2 * n, FftDirection::Forward);
        let fft_inv = planner.plan_fft(2 * n, FftDirection::Inverse);

        let two_n = 2 * n;
        let mut rot_group = Vec::with_capacity(n / 2);
        let mut power = 1usize;
        for _ in 0..n / 2 {
            rot_group.push(power);
            power = power * 5 % two_n;
        }

        let mut hasher = Sha256::new();
        hasher.update(n.to_le_bytes());
        hasher.update(params.scale_log2.to_le_bytes());
        for &b in &params.coeff_modulus_bits {
            hasher.update(b.to_le_bytes());
        }
        for q in key_chain.moduli() {
            hasher.update(q.to_le_bytes());
        }
        let digest = hasher.finalize();
        let fingerprint = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));

        Ok(Self {
            params,
            key_chain,
            data_chain,
            ks_chains,
            p_mod_qi,
            p_inv_qi,
            crt,
            fft_fwd,
            fft_inv,
            rot_group,
            fingerprint,
        })
    }

    #[inline]
    pub fn params(&self) -> &CkksParams {
        &self.params
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.params.n
    }

    #[inline]
    pub fn slot_count(&self) -> usize {
        self.params.slot_count()
    }

    #[inline]
    pub fn top_level(&self) -> usize {
        self.params.top_level()
    }

    /// Hash of the full parameter set, embedded in serialized ciphertexts.
    #[inline]
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn key_chain(&self) -> &Chain {
        &self.key_chain
    }

    pub fn data_chain(&self) -> &Chain {
        &self.data_chain
    }

    /// Data-prime prefix chain for a ciphertext level.
    pub fn level_chain(&self, level: usize) -> Result<Chain> {
        if level >= self.params.data_prime_count() {
            return Err(CkksError::LevelMismatch {
                a: level,
                b: self.params.data_prime_count() - 1,
            });
        }
        Ok(self.data_chain.prefix(level + 1)?)
    }

    pub(crate) fn ks_chain(&self, level: usize) -> &Chain {
        &self.ks_chains[level]
    }

    pub(crate) fn p_mod_qi(&self) -> &[u64] {
        &self.p_mod_qi
    }

    pub(crate) fn p_inv_qi(&self) -> &[u64] {
        &self.p_inv_qi
    }

    pub(crate) fn crt_level(&self, level: usize) -> &CrtLevel {
        &self.crt[level]
    }

    pub(crate) fn fft_fwd(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_fwd
    }

    pub(crate) fn fft_inv(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_inv
    }

    pub(crate) fn rot_group(&self) -> &[usize] {
        &self.rot_group
    }

    /// Widths of the data primes, indexed by level.
    pub fn data_prime_bits(&self, level: usize) -> u32 {
        self.params.coeff_modulus_bits[level]
    }

    /// Applies the Galois automorphism X -> X^g to a coefficient-domain poly.
    pub(crate) fn apply_automorphism(&self, p: &RnsPoly, g: usize) -> Result<RnsPoly> {
        p.expect_domain(Domain::Coefficient)?;
        let n = self.n();
        let two_n = 2 * n;
        debug_assert!(g % 2 == 1, "galois element must be odd");
        let mut out = RnsPoly::zero(n, Domain::Coefficient, &p.moduli());
        for (row_in, row_out) in p.rows().iter().zip(out.rows_mut()) {
            let q = row_in.q;
            for (k, &v) in row_in.values.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let e = k * g % two_n;
                if e < n {
                    row_out.values[e] = ring_arith::add_mod(row_out.values[e], v, q);
                } else {
                    row_out.values[e - n] = ring_arith::sub_mod(row_out.values[e - n], v, q);
                }
            }
        }
        Ok(out)
    }

    /// Galois element for a slot rotation by `steps` (positive = left).
    pub(crate) fn galois_element(&self, steps: i64) -> usize {
        let half = (self.n() / 2) as i64;
        let r = steps.rem_euclid(half) as u64;
        let two_n = 2 * self.n() as u64;
        let mut g = 1u64;
        let mut base = 5u64 % two_n;
        let mut e = r;
        while e > 0 {
            if e & 1 == 1 {
                g = g * base % two_n;
            }
            base = base * base % two_n;
            e >>= 1;
        }
        g as usize
    }
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context")
            .field("n", &self.params.n)
            .field("coeff_modulus_bits", &self.params.coeff_modulus_bits)
            .field("scale_log2", &self.params.scale_log2)
            .field("fingerprint", &format_args!("{:016x}", self.fingerprint))
            .finish()
    }
}
