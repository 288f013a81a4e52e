//! NTT-friendly prime moduli with precomputed negacyclic twiddle tables.

use crate::modops::*;
use crate::{RingError, Result};

/// A prime q ≡ 1 (mod 2n) together with the forward/inverse twiddle tables
/// for the negacyclic NTT of length n.
#[derive(Debug, Clone)]
pub struct PrimeModulus {
    q: u64,
    n: usize,
    psi: u64,
    // psi^brv(i) and psi^-brv(i), each paired with its Shoup companion
    fwd: Vec<u64>,
    fwd_shoup: Vec<u64>,
    inv: Vec<u64>,
    inv_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

impl PrimeModulus {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(RingError::InvalidParameter(format!(
                "ring degree {n} is not a power of two >= 2"
            )));
        }
        if q >= 1 << 62 {
            return Err(RingError::InvalidParameter(format!(
                "prime {q} exceeds the 62-bit arithmetic headroom"
            )));
        }
        if !is_prime_u64(q) {
            return Err(RingError::InvalidParameter(format!("{q} is not prime")));
        }
        let two_n = 2 * n as u64;
        if (q - 1) % two_n != 0 {
            return Err(RingError::InvalidParameter(format!(
                "{q} != 1 mod {two_n}; no 2n-th root of unity exists"
            )));
        }
        let psi = find_primitive_2n_root(q, n)?;
        let psi_inv = inv_mod(psi, q);
        let log_n = n.trailing_zeros();

        let mut fwd = vec![0u64; n];
        let mut inv = vec![0u64; n];
        let mut pow_f = 1u64;
        let mut pow_i = 1u64;
        for i in 0..n {
            let r = bit_reverse(i, log_n);
            fwd[r] = pow_f;
            inv[r] = pow_i;
            pow_f = mul_mod(pow_f, psi, q);
            pow_i = mul_mod(pow_i, psi_inv, q);
        }
        let fwd_shoup = fwd.iter().map(|&w| shoup_precompute(w, q)).collect();
        let inv_shoup = inv.iter().map(|&w| shoup_precompute(w, q)).collect();
        let n_inv = inv_mod(n as u64, q);

        Ok(Self {
            q,
            n,
            psi,
            fwd,
            fwd_shoup,
            inv,
            inv_shoup,
            n_inv,
            n_inv_shoup: shoup_precompute(n_inv, q),
        })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    /// In-place forward negacyclic NTT (Cooley-Tukey, natural input order,
    /// bit-reversed evaluation order on output).
    pub fn ntt_forward_row(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t >>= 1;
            for i in 0..m {
                let j1 = 2 * i * t;
                let s = self.fwd[m + i];
                let s_sh = self.fwd_shoup[m + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_mod_shoup(a[j + t], s, s_sh, q);
                    a[j] = add_mod(u, v, q);
                    a[j + t] = sub_mod(u, v, q);
                }
            }
            m <<= 1;
        }
    }

    /// In-place inverse negacyclic NTT (Gentleman-Sande), including the
    /// n^{-1} scaling.
    pub fn ntt_inverse_row(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.inv[h + i];
                let s_sh = self.inv_shoup[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, q);
                    a[j + t] = mul_mod_shoup(sub_mod(u, v, q), s, s_sh, q);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_mod_shoup(*x, self.n_inv, self.n_inv_shoup, q);
        }
    }
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    x.reverse_bits() >> (usize::BITS - bits)
}

/// Finds psi with psi^(2n) = 1 and psi^n = -1 mod q.
fn find_primitive_2n_root(q: u64, n: usize) -> Result<u64> {
    let two_n = 2 * n as u64;
    let exp = (q - 1) / two_n;
    for candidate in 2..u64::min(q, 10_000) {
        let psi = pow_mod(candidate, exp, q);
        if pow_mod(psi, n as u64, q) == q - 1 {
            return Ok(psi);
        }
    }
    Err(RingError::InvalidParameter(format!(
        "no primitive 2n-th root of unity found mod {q}"
    )))
}

/// Largest prime q < 2^bits with q ≡ 1 (mod 2n), skipping entries in `exclude`.
pub fn find_ntt_prime_below(bits: u32, n: usize, exclude: &[u64]) -> Result<u64> {
    let two_n = 2 * n as u64;
    let top = 1u64 << bits;
    // largest value ≡ 1 mod 2n strictly below 2^bits
    let mut candidate = ((top - 2) / two_n) * two_n + 1;
    let floor = 1u64 << (bits - 1);
    while candidate > floor {
        if !exclude.contains(&candidate) && is_prime_u64(candidate) {
            return Ok(candidate);
        }
        candidate -= two_n;
    }
    Err(RingError::NoPrimeFound { bits, n })
}

/// Smallest prime q ≡ 1 (mod 2n); used by the small-degree test oracles.
pub fn smallest_ntt_prime(n: usize, at_least: u64) -> Result<u64> {
    let two_n = 2 * n as u64;
    let mut candidate = (at_least.max(2) / two_n) * two_n + 1;
    if candidate < at_least {
        candidate += two_n;
    }
    loop {
        if candidate > at_least && is_prime_u64(candidate) {
            return Ok(candidate);
        }
        candidate = candidate.checked_add(two_n).ok_or(RingError::NoPrimeFound {
            bits: 64,
            n,
        })?;
    }
}
