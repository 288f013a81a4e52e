//! RNS polynomials and coefficient-wise ring operations.

use crate::modops::*;
use crate::{RingError, Result};

/// Representation domain of a polynomial's residue rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Standard coefficient representation.
    Coefficient,
    /// Negacyclic NTT (evaluation) representation; products are pointwise.
    Evaluation,
}

/// One residue row: the polynomial reduced modulo a single prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueRow {
    pub q: u64,
    pub values: Vec<u64>,
}

/// A polynomial in Z_Q[X]/(X^n+1) with Q = ∏ q_i, stored as one residue
/// row per prime of the active chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    n: usize,
    domain: Domain,
    rows: Vec<ResidueRow>,
}

impl RnsPoly {
    pub fn new(n: usize, domain: Domain, rows: Vec<ResidueRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(RingError::InvalidParameter("empty modulus chain".into()));
        }
        for row in &rows {
            if row.values.len() != n {
                return Err(RingError::DegreeMismatch(row.values.len(), n));
            }
            if row.values.iter().any(|&v| v >= row.q) {
                return Err(RingError::InvalidParameter(format!(
                    "residue out of range for modulus {}",
                    row.q
                )));
            }
        }
        Ok(Self { n, domain, rows })
    }

    pub fn zero(n: usize, domain: Domain, moduli: &[u64]) -> Self {
        let rows = moduli
            .iter()
            .map(|&q| ResidueRow {
                q,
                values: vec![0; n],
            })
            .collect();
        Self { n, domain, rows }
    }

    /// The constant polynomial `c` (same residue in every row), coefficient domain.
    pub fn constant(n: usize, c: u64, moduli: &[u64]) -> Self {
        let rows = moduli
            .iter()
            .map(|&q| {
                let mut values = vec![0; n];
                values[0] = c % q;
                ResidueRow { q, values }
            })
            .collect();
        Self {
            n,
            domain: Domain::Coefficient,
            rows,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn rows(&self) -> &[ResidueRow] {
        &self.rows
    }

    #[inline]
    pub fn rows_mut(&mut self) -> &mut [ResidueRow] {
        &mut self.rows
    }

    #[inline]
    pub fn level_count(&self) -> usize {
        self.rows.len()
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.q).collect()
    }

    pub(crate) fn set_domain(&mut self, d: Domain) {
        self.domain = d;
    }

    /// Drops trailing residue rows, keeping the first `keep`. Exact for
    /// values whose centered magnitude stays below the remaining modulus.
    pub fn truncate_rows(&mut self, keep: usize) -> Result<()> {
        if keep == 0 || keep > self.rows.len() {
            return Err(RingError::InvalidParameter(format!(
                "cannot keep {keep} of {} rows",
                self.rows.len()
            )));
        }
        self.rows.truncate(keep);
        Ok(())
    }

    pub fn expect_domain(&self, d: Domain) -> Result<()> {
        if self.domain != d {
            return Err(RingError::DomainMismatch {
                expected: d,
                got: self.domain,
            });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(RingError::DegreeMismatch(self.n, other.n));
        }
        if self.domain != other.domain {
            return Err(RingError::DomainMismatch {
                expected: self.domain,
                got: other.domain,
            });
        }
        if self.rows.len() != other.rows.len()
            || self
                .rows
                .iter()
                .zip(&other.rows)
                .any(|(a, b)| a.q != b.q)
        {
            return Err(RingError::ChainMismatch);
        }
        Ok(())
    }
}

pub fn poly_add(a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
    a.check_compatible(b)?;
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| ResidueRow {
            q: ra.q,
            values: ra
                .values
                .iter()
                .zip(&rb.values)
                .map(|(&x, &y)| add_mod(x, y, ra.q))
                .collect(),
        })
        .collect();
    Ok(RnsPoly {
        n: a.n,
        domain: a.domain,
        rows,
    })
}

pub fn poly_sub(a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
    a.check_compatible(b)?;
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| ResidueRow {
            q: ra.q,
            values: ra
                .values
                .iter()
                .zip(&rb.values)
                .map(|(&x, &y)| sub_mod(x, y, ra.q))
                .collect(),
        })
        .collect();
    Ok(RnsPoly {
        n: a.n,
        domain: a.domain,
        rows,
    })
}

pub fn poly_negate(a: &RnsPoly) -> RnsPoly {
    let rows = a
        .rows
        .iter()
        .map(|r| ResidueRow {
            q: r.q,
            values: r
                .values
                .iter()
                .map(|&x| if x == 0 { 0 } else { r.q - x })
                .collect(),
        })
        .collect();
    RnsPoly {
        n: a.n,
        domain: a.domain,
        rows,
    }
}

/// Pointwise product; both operands must be in the evaluation domain, where
/// the pointwise product equals the negacyclic convolution of the
/// coefficient-domain polynomials.
pub fn poly_mul(a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
    a.expect_domain(Domain::Evaluation)?;
    a.check_compatible(b)?;
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| ResidueRow {
            q: ra.q,
            values: ra
                .values
                .iter()
                .zip(&rb.values)
                .map(|(&x, &y)| mul_mod(x, y, ra.q))
                .collect(),
        })
        .collect();
    Ok(RnsPoly {
        n: a.n,
        domain: Domain::Evaluation,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_poly(n: usize, moduli: &[u64], seed: u64) -> RnsPoly {
        let rows = moduli
            .iter()
            .map(|&q| ResidueRow {
                q,
                values: (0..n as u64).map(|i| (i * seed + 3) % q).collect(),
            })
            .collect();
        RnsPoly::new(n, Domain::Coefficient, rows).unwrap()
    }

    #[test]
    fn add_identity_and_inverse() {
        let moduli = [97u64, 113];
        let a = sample_poly(8, &moduli, 7919);
        let zero = RnsPoly::zero(8, Domain::Coefficient, &moduli);
        assert_eq!(poly_add(&a, &zero).unwrap(), a);
        assert_eq!(poly_add(&a, &poly_negate(&a)).unwrap(), zero);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = sample_poly(8, &[97], 1);
        let b = sample_poly(8, &[113], 1);
        assert!(matches!(poly_add(&a, &b), Err(RingError::ChainMismatch)));

        let c = sample_poly(4, &[97], 1);
        assert!(matches!(
            poly_add(&a, &c),
            Err(RingError::DegreeMismatch(..))
        ));

        let mut d = sample_poly(8, &[97], 1);
        d.set_domain(Domain::Evaluation);
        assert!(matches!(
            poly_add(&a, &d),
            Err(RingError::DomainMismatch { .. })
        ));
        assert!(matches!(
            poly_mul(&a, &a),
            Err(RingError::DomainMismatch { .. })
        ));
    }
}
