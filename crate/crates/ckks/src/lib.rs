//! Approximate homomorphic encryption for fixed-point real vectors.
//!
//! Values are packed into n/2 slots via the canonical embedding, encrypted
//! as RLWE pairs over a residue chain, and support addition, plaintext and
//! ciphertext multiplication (with relinearization), rescaling, and slot
//! rotation through Galois key switching. The final chain prime acts as the
//! key-switching modulus and never carries ciphertext data.
//!
//! Two parameter profiles ship: `paper` (n = 8192, primes [60,40,40,60],
//! scale 2^40) and `toy` (n = 16, [40,30,40], 2^20). The toy profile exists
//! for exact small-scale checks and offers no security whatsoever.

mod cipher;
mod context;
mod encoding;
mod keys;
mod params;
mod serialize;

pub use cipher::{Ciphertext, Plaintext};
pub use context::Context;
pub use keys::{gen_galois_keys, keygen, KeySet, KskKey, PublicKey, SecretKey};
pub use params::{CkksParams, Profile};
pub use serialize::{deserialize_ciphertext, serialize_ciphertext};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CkksError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("ring error: {0}")]
    Ring(#[from] ring_arith::RingError),
    #[error("too many values: {got} > {capacity} slots")]
    CapacityExceeded { got: usize, capacity: usize },
    #[error("scale mismatch: 2^{a} vs 2^{b}")]
    ScaleMismatch { a: i32, b: i32 },
    #[error("level mismatch: {a} vs {b}")]
    LevelMismatch { a: usize, b: usize },
    #[error("scale 2^{scale} exceeds the modulus capacity at level {level}")]
    ScaleOverflow { scale: i32, level: usize },
    #[error("ciphertext has {got} parts, expected {expected}")]
    PartCount { expected: usize, got: usize },
    #[error("no Galois key for rotation step {0}")]
    MissingGaloisKey(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ciphertext was produced under a different context")]
    ContextMismatch,
}

pub type Result<T> = std::result::Result<T, CkksError>;
