//! Ordered prime chains and the operations that need twiddle tables.

use std::sync::Arc;

use crate::modops::*;
use crate::poly::{Domain, RnsPoly};
use crate::prime::PrimeModulus;
use crate::{RingError, Result};

/// An ordered list of NTT-friendly primes sharing one ring degree.
/// Sub-chains (prefixes) share the precomputed tables via `Arc`.
#[derive(Debug, Clone)]
pub struct Chain {
    n: usize,
    primes: Vec<Arc<PrimeModulus>>,
}

impl Chain {
    pub fn new(primes: Vec<Arc<PrimeModulus>>) -> Result<Self> {
        let n = primes
            .first()
            .ok_or_else(|| RingError::InvalidParameter("empty chain".into()))?
            .n();
        if primes.iter().any(|p| p.n() != n) {
            return Err(RingError::InvalidParameter(
                "chain primes disagree on ring degree".into(),
            ));
        }
        let mut qs: Vec<u64> = primes.iter().map(|p| p.q()).collect();
        qs.sort_unstable();
        qs.dedup();
        if qs.len() != primes.len() {
            return Err(RingError::InvalidParameter("duplicate chain prime".into()));
        }
        Ok(Self { n, primes })
    }

    /// Builds a chain by descending prime search below 2^bits for each entry.
    pub fn generate(n: usize, bit_sizes: &[u32]) -> Result<Self> {
        let mut found: Vec<u64> = Vec::new();
        let mut primes = Vec::with_capacity(bit_sizes.len());
        for &bits in bit_sizes {
            let q = crate::prime::find_ntt_prime_below(bits, n, &found)?;
            found.push(q);
            primes.push(Arc::new(PrimeModulus::new(q, n)?));
        }
        Self::new(primes)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn prime(&self, i: usize) -> &Arc<PrimeModulus> {
        &self.primes[i]
    }

    pub fn primes(&self) -> &[Arc<PrimeModulus>] {
        &self.primes
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.primes.iter().map(|p| p.q()).collect()
    }

    /// Prefix sub-chain of the first `len` primes (tables shared).
    pub fn prefix(&self, len: usize) -> Result<Chain> {
        if len == 0 || len > self.primes.len() {
            return Err(RingError::InvalidParameter(format!(
                "prefix length {len} out of range"
            )));
        }
        Ok(Chain {
            n: self.n,
            primes: self.primes[..len].to_vec(),
        })
    }

    fn check_poly(&self, p: &RnsPoly) -> Result<()> {
        if p.n() != self.n {
            return Err(RingError::DegreeMismatch(p.n(), self.n));
        }
        if p.level_count() > self.primes.len() {
            return Err(RingError::ChainMismatch);
        }
        for (row, pm) in p.rows().iter().zip(&self.primes) {
            if row.q != pm.q() {
                return Err(RingError::ChainMismatch);
            }
        }
        Ok(())
    }

    /// Coefficient -> evaluation domain.
    pub fn ntt_forward(&self, p: &RnsPoly) -> Result<RnsPoly> {
        p.expect_domain(Domain::Coefficient)?;
        self.check_poly(p)?;
        let mut out = p.clone();
        for (row, pm) in out.rows_mut().iter_mut().zip(&self.primes) {
            pm.ntt_forward_row(&mut row.values);
        }
        out.set_domain(Domain::Evaluation);
        Ok(out)
    }

    /// Evaluation -> coefficient domain (includes the n^{-1} scaling).
    pub fn ntt_inverse(&self, p: &RnsPoly) -> Result<RnsPoly> {
        p.expect_domain(Domain::Evaluation)?;
        self.check_poly(p)?;
        let mut out = p.clone();
        for (row, pm) in out.rows_mut().iter_mut().zip(&self.primes) {
            pm.ntt_inverse_row(&mut row.values);
        }
        out.set_domain(Domain::Coefficient);
        Ok(out)
    }

    /// Drops the last active prime q_drop, replacing the value c by
    /// round(c / q_drop) in RNS form (coefficient domain).
    pub fn rescale_drop_prime(&self, p: &RnsPoly) -> Result<RnsPoly> {
        p.expect_domain(Domain::Coefficient)?;
        self.check_poly(p)?;
        let levels = p.level_count();
        if levels < 2 {
            return Err(RingError::LevelExhausted);
        }
        let last = &p.rows()[levels - 1];
        let q_drop = last.q;
        let half = q_drop >> 1;

        let mut out_rows = Vec::with_capacity(levels - 1);
        for row in &p.rows()[..levels - 1] {
            let q = row.q;
            let q_drop_mod = q_drop % q;
            let q_drop_inv = inv_mod(q_drop_mod, q);
            let values = row
                .values
                .iter()
                .zip(&last.values)
                .map(|(&c, &r)| {
                    // centered representative of r mod q_drop, reduced mod q
                    let r_centered = if r > half {
                        sub_mod(r % q, q_drop_mod, q)
                    } else {
                        r % q
                    };
                    mul_mod(sub_mod(c, r_centered, q), q_drop_inv, q)
                })
                .collect();
            out_rows.push(crate::poly::ResidueRow { q, values });
        }
        RnsPoly::new(p.n(), Domain::Coefficient, out_rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ResidueRow;

    fn toy_chain(n: usize, bits: &[u32]) -> Chain {
        Chain::generate(n, bits).unwrap()
    }

    #[test]
    fn generate_produces_distinct_primes() {
        let chain = toy_chain(16, &[40, 30, 40]);
        let moduli = chain.moduli();
        assert_eq!(moduli.len(), 3);
        assert_ne!(moduli[0], moduli[2]);
        for (&q, &bits) in moduli.iter().zip(&[40u32, 30, 40]) {
            assert!(q < 1 << bits && q > 1 << (bits - 1));
            assert_eq!((q - 1) % 32, 0);
        }
    }

    #[test]
    fn ntt_roundtrip_is_exact() {
        let chain = toy_chain(8, &[30, 30]);
        let rows = chain
            .moduli()
            .iter()
            .map(|&q| ResidueRow {
                q,
                values: (0..8u64).map(|i| (i * i * 1234567 + 9) % q).collect(),
            })
            .collect();
        let p = RnsPoly::new(8, Domain::Coefficient, rows).unwrap();
        let back = chain.ntt_inverse(&chain.ntt_forward(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rescale_requires_two_primes() {
        let chain = toy_chain(4, &[30]);
        let p = RnsPoly::zero(4, Domain::Coefficient, &chain.moduli());
        assert!(matches!(
            chain.rescale_drop_prime(&p),
            Err(RingError::LevelExhausted)
        ));
    }

    #[test]
    fn rescale_of_zero_is_zero() {
        let chain = toy_chain(4, &[30, 20]);
        let p = RnsPoly::zero(4, Domain::Coefficient, &chain.moduli());
        let r = chain.rescale_drop_prime(&p).unwrap();
        assert_eq!(r, RnsPoly::zero(4, Domain::Coefficient, &chain.moduli()[..1]));
    }

    #[test]
    fn rescale_divides_small_constants() {
        // encode the integer v * q_drop; rescale must return v exactly
        let chain = toy_chain(4, &[30, 20]);
        let moduli = chain.moduli();
        let q_drop = moduli[1];
        let v: u64 = 12345;
        let prod = v as u128 * q_drop as u128;
        let rows = moduli
            .iter()
            .map(|&q| {
                let mut values = vec![0u64; 4];
                values[0] = (prod % q as u128) as u64;
                ResidueRow { q, values }
            })
            .collect();
        let p = RnsPoly::new(4, Domain::Coefficient, rows).unwrap();
        let r = chain.rescale_drop_prime(&p).unwrap();
        assert_eq!(r.rows()[0].values[0], v % moduli[0]);
    }
}
