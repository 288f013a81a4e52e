//! Exact arithmetic in the negacyclic ring Z_q[X]/(X^n + 1).
//!
//! Coefficients live in residue-number-system (RNS) form: one residue row
//! per prime in the active modulus chain. Multiplication goes through a
//! negacyclic number-theoretic transform (2n-th root twiddles), so the
//! X^n = -1 reduction is native and no zero-padding is needed.
//!
//! All operations are pure functions on immutable inputs; samplers take an
//! explicit generator so every result is reproducible from a seed.

mod chain;
mod modops;
mod poly;
mod prime;
mod sample;

pub use chain::Chain;
pub use modops::{add_mod, inv_mod, is_prime_u64, mul_mod, pow_mod, sub_mod};
pub use poly::{poly_add, poly_mul, poly_negate, poly_sub, Domain, ResidueRow, RnsPoly};
pub use prime::{find_ntt_prime_below, smallest_ntt_prime, PrimeModulus};
pub use sample::{sample_gaussian, sample_ternary, sample_uniform, signed_to_poly};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RingError {
    #[error("domain mismatch: expected {expected:?}, got {got:?}")]
    DomainMismatch { expected: Domain, got: Domain },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("modulus chain mismatch")]
    ChainMismatch,
    #[error("modulus chain exhausted: cannot drop below one prime")]
    LevelExhausted,
    #[error("invalid ring parameter: {0}")]
    InvalidParameter(String),
    #[error("no suitable prime of {bits} bits for degree {n}")]
    NoPrimeFound { bits: u32, n: usize },
}

pub type Result<T> = std::result::Result<T, RingError>;
