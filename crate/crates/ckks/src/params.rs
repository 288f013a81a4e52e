//! Encryption parameter sets.

use crate::{CkksError, Result};

/// Parameter profile selector used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// n = 8192, primes [60, 40, 40, 60], scale 2^40.
    Paper,
    /// n = 16, primes [40, 30, 40], scale 2^20. Insecure; for exact
    /// small-scale oracle checks only.
    Toy,
}

/// CKKS parameters: ring degree, coefficient-modulus widths (the last
/// entry is the key-switching prime), and the global scale exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkksParams {
    pub n: usize,
    pub coeff_modulus_bits: Vec<u32>,
    pub scale_log2: i32,
}

impl CkksParams {
    pub fn new(n: usize, coeff_modulus_bits: Vec<u32>, scale_log2: i32) -> Result<Self> {
        let p = Self {
            n,
            coeff_modulus_bits,
            scale_log2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn profile(which: Profile) -> Self {
        match which {
            Profile::Paper => Self {
                n: 8192,
                coeff_modulus_bits: vec![60, 40, 40, 60],
                scale_log2: 40,
            },
            Profile::Toy => Self {
                n: 16,
                coeff_modulus_bits: vec![40, 30, 40],
                scale_log2: 20,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(CkksError::InvalidParams(format!(
                "polynomial modulus degree {} must be a power of two >= 4",
                self.n
            )));
        }
        if self.coeff_modulus_bits.len() < 2 {
            return Err(CkksError::InvalidParams(
                "need at least one data prime plus the key-switching prime".into(),
            ));
        }
        if let Some(&bad) = self
            .coeff_modulus_bits
            .iter()
            .find(|&&b| !(20..=60).contains(&b))
        {
            return Err(CkksError::InvalidParams(format!(
                "prime width {bad} outside the supported 20..=60 bit range"
            )));
        }
        if self.scale_log2 < 2 {
            return Err(CkksError::InvalidParams("scale must be at least 2^2".into()));
        }
        // Rescaling divides by one of the non-leading data primes, so the
        // scale must not exceed their width.
        let data = &self.coeff_modulus_bits[..self.coeff_modulus_bits.len() - 1];
        if data.len() > 1 {
            let min_mid = *data[1..].iter().min().expect("nonempty");
            if self.scale_log2 > min_mid as i32 {
                return Err(CkksError::InvalidParams(format!(
                    "scale 2^{} exceeds the smallest rescaling prime width {}",
                    self.scale_log2, min_mid
                )));
            }
        }
        Ok(())
    }

    /// Number of packed real slots.
    pub fn slot_count(&self) -> usize {
        self.n / 2
    }

    /// Number of primes available to ciphertexts (chain minus the
    /// key-switching prime).
    pub fn data_prime_count(&self) -> usize {
        self.coeff_modulus_bits.len() - 1
    }

    /// Highest ciphertext level (fresh encryptions start here).
    pub fn top_level(&self) -> usize {
        self.data_prime_count() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        CkksParams::profile(Profile::Paper).validate().unwrap();
        CkksParams::profile(Profile::Toy).validate().unwrap();
    }

    #[test]
    fn degree_must_be_power_of_two() {
        assert!(CkksParams::new(3, vec![40, 30, 40], 20).is_err());
        assert!(CkksParams::new(0, vec![40, 30, 40], 20).is_err());
    }

    #[test]
    fn scale_bounded_by_rescaling_primes() {
        assert!(CkksParams::new(16, vec![40, 30, 40], 31).is_err());
        assert!(CkksParams::new(16, vec![40, 30, 40], 30).is_ok());
    }

    #[test]
    fn slot_and_level_accounting() {
        let p = CkksParams::profile(Profile::Paper);
        assert_eq!(p.slot_count(), 4096);
        assert_eq!(p.data_prime_count(), 3);
        assert_eq!(p.top_level(), 2);
    }
}
