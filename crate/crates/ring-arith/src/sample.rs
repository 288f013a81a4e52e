//! Key, error, and masking distributions for RLWE-style schemes.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::chain::Chain;
use crate::poly::{Domain, ResidueRow, RnsPoly};

/// Uniform element of R_Q, coefficient domain. Sampling each residue row
/// independently is uniform over Z_Q by CRT.
pub fn sample_uniform<R: Rng>(chain: &Chain, rng: &mut R) -> RnsPoly {
    let n = chain.n();
    let rows = chain
        .moduli()
        .iter()
        .map(|&q| ResidueRow {
            q,
            values: (0..n).map(|_| rng.gen_range(0..q)).collect(),
        })
        .collect();
    RnsPoly::new(n, Domain::Coefficient, rows).expect("uniform rows are well formed")
}

/// Ternary polynomial with coefficients in {-1, 0, 1}, coefficient domain.
pub fn sample_ternary<R: Rng>(chain: &Chain, rng: &mut R) -> RnsPoly {
    let n = chain.n();
    let vals: Vec<i64> = (0..n).map(|_| rng.gen_range(-1i64..=1)).collect();
    signed_to_poly(chain, &vals)
}

/// Rounded continuous Gaussian with standard deviation `sigma`.
pub fn sample_gaussian<R: Rng>(chain: &Chain, sigma: f64, rng: &mut R) -> RnsPoly {
    assert!(sigma > 0.0, "sigma must be positive");
    let normal = Normal::new(0.0, sigma).expect("valid normal parameters");
    let n = chain.n();
    let vals: Vec<i64> = (0..n).map(|_| normal.sample(rng).round() as i64).collect();
    signed_to_poly(chain, &vals)
}

/// Lifts signed coefficients into RNS rows (negative values wrap mod q).
pub fn signed_to_poly(chain: &Chain, vals: &[i64]) -> RnsPoly {
    assert_eq!(vals.len(), chain.n());
    let rows = chain
        .moduli()
        .iter()
        .map(|&q| ResidueRow {
            q,
            values: vals
                .iter()
                .map(|&v| {
                    let m = v.rem_euclid(q as i64);
                    m as u64
                })
                .collect(),
        })
        .collect();
    RnsPoly::new(vals.len(), Domain::Coefficient, rows).expect("signed rows are well formed")
}
