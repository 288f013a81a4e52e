//! Key material: secret/public keys and key-switching keys.
//!
//! Key switching uses the last chain prime p as an auxiliary modulus: each
//! switching key encrypts p * w_i * t, where w_i is the CRT interpolation
//! factor of data prime i. Applying the key decomposes the input by RNS
//! row, multiplies against the key pairs over the extended chain, then
//! divides by p with rounding. The extra factor p keeps the key noise far
//! below the data.

use std::collections::BTreeMap;

use rand::Rng;

use ring_arith::{
    mul_mod, poly_add, poly_mul, poly_negate, sample_gaussian, sample_ternary, sample_uniform,
    Chain, Domain, ResidueRow, RnsPoly,
};

use crate::context::Context;
use crate::{CkksError, Result};

/// Standard deviation of the RLWE error distribution.
pub const ERROR_SIGMA: f64 = 3.2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    /// Ternary secret over the full key chain, evaluation domain.
    pub(crate) s: RnsPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    /// b = -(a*s) + e over the data chain, evaluation domain.
    pub(crate) b: RnsPoly,
    pub(crate) a: RnsPoly,
}

/// A key-switching key toward some target polynomial t: one RLWE pair per
/// data prime, all over the full key chain in evaluation domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KskKey {
    pub(crate) pairs: Vec<(RnsPoly, RnsPoly)>,
}

#[derive(Debug, Clone)]
pub struct KeySet {
    pub secret: SecretKey,
    pub public: PublicKey,
    pub relin: KskKey,
    pub galois: BTreeMap<i64, KskKey>,
}

/// Generates a fresh key set. Galois keys are produced for step 1 by
/// default; more can be added with [`gen_galois_keys`].
pub fn keygen<R: Rng>(ctx: &Context, rng: &mut R) -> Result<KeySet> {
    let key_chain = ctx.key_chain();
    let data_chain = ctx.data_chain();

    let s = key_chain.ntt_forward(&sample_ternary(key_chain, rng))?;

    // Public key over the data primes only.
    let s_data = restrict_rows(&s, data_chain.len());
    let a = data_chain.ntt_forward(&sample_uniform(data_chain, rng))?;
    let e = data_chain.ntt_forward(&sample_gaussian(data_chain, ERROR_SIGMA, rng))?;
    let b = poly_add(&poly_negate(&poly_mul(&a, &s_data)?), &e)?;

    let s_squared = poly_mul(&s, &s)?;
    let relin = gen_ksk(ctx, &s, &s_squared, rng)?;

    let secret = SecretKey { s };
    let mut galois = BTreeMap::new();
    galois.insert(1, gen_galois_key(ctx, &secret, 1, rng)?);

    Ok(KeySet {
        secret,
        public: PublicKey { b, a },
        relin,
        galois,
    })
}

/// Galois keys for the requested rotation steps.
pub fn gen_galois_keys<R: Rng>(
    ctx: &Context,
    sk: &SecretKey,
    steps: &[i64],
    rng: &mut R,
) -> Result<BTreeMap<i64, KskKey>> {
    let mut out = BTreeMap::new();
    for &step in steps {
        out.insert(step, gen_galois_key(ctx, sk, step, rng)?);
    }
    Ok(out)
}

fn gen_galois_key<R: Rng>(
    ctx: &Context,
    sk: &SecretKey,
    step: i64,
    rng: &mut R,
) -> Result<KskKey> {
    let key_chain = ctx.key_chain();
    let g = ctx.galois_element(step);
    let s_coeff = key_chain.ntt_inverse(&sk.s)?;
    let s_rotated = key_chain.ntt_forward(&ctx.apply_automorphism(&s_coeff, g)?)?;
    gen_ksk(ctx, &sk.s, &s_rotated, rng)
}

/// Builds the switching key encrypting p * w_i * t for each data prime i.
/// In RNS form p * w_i has a single nonzero row: (p mod q_i) at row i.
pub(crate) fn gen_ksk<R: Rng>(
    ctx: &Context,
    s: &RnsPoly,
    target: &RnsPoly,
    rng: &mut R,
) -> Result<KskKey> {
    let key_chain = ctx.key_chain();
    let data_len = ctx.data_chain().len();
    let mut pairs = Vec::with_capacity(data_len);
    for i in 0..data_len {
        let a_i = key_chain.ntt_forward(&sample_uniform(key_chain, rng))?;
        let e_i = key_chain.ntt_forward(&sample_gaussian(key_chain, ERROR_SIGMA, rng))?;
        let mut b_i = poly_add(&poly_negate(&poly_mul(&a_i, s)?), &e_i)?;
        let p_mod = ctx.p_mod_qi()[i];
        {
            let row = &mut b_i.rows_mut()[i];
            let q = row.q;
            let target_row = &target.rows()[i];
            debug_assert_eq!(target_row.q, q);
            for (dst, &t) in row.values.iter_mut().zip(&target_row.values) {
                *dst = ring_arith::add_mod(*dst, mul_mod(p_mod, t, q), q);
            }
        }
        pairs.push((b_i, a_i));
    }
    Ok(KskKey { pairs })
}

/// Switches `c` (coefficient domain, level-chain rows) toward the key's
/// target: returns (delta0, delta1) in evaluation domain at the same level,
/// such that delta0 + delta1*s ~ c*t.
pub(crate) fn apply_ksk(ctx: &Context, c: &RnsPoly, ksk: &KskKey) -> Result<(RnsPoly, RnsPoly)> {
    c.expect_domain(Domain::Coefficient)?;
    let level = c.level_count() - 1;
    let ks_chain = ctx.ks_chain(level); // data prefix + special prime

    let mut acc0 = RnsPoly::zero(ctx.n(), Domain::Evaluation, &ks_chain.moduli());
    let mut acc1 = acc0.clone();
    for i in 0..=level {
        let decomposed = spread_row(&c.rows()[i], ks_chain)?;
        let decomposed = ks_chain.ntt_forward(&decomposed)?;
        let (b_i, a_i) = &ksk.pairs[i];
        let b_rows = select_ks_rows(b_i, level);
        let a_rows = select_ks_rows(a_i, level);
        acc0 = poly_add(&acc0, &poly_mul(&decomposed, &b_rows)?)?;
        acc1 = poly_add(&acc1, &poly_mul(&decomposed, &a_rows)?)?;
    }

    let level_chain = ctx.level_chain(level)?;
    let d0 = divide_by_special(ctx, &ks_chain.ntt_inverse(&acc0)?, level)?;
    let d1 = divide_by_special(ctx, &ks_chain.ntt_inverse(&acc1)?, level)?;
    Ok((
        level_chain.ntt_forward(&d0)?,
        level_chain.ntt_forward(&d1)?,
    ))
}

/// Lifts one residue row (integer representatives in [0, q_i)) to every
/// modulus of the key-switching chain, coefficient domain.
fn spread_row(row: &ResidueRow, ks_chain: &Chain) -> Result<RnsPoly> {
    let rows = ks_chain
        .moduli()
        .iter()
        .map(|&q| ResidueRow {
            q,
            values: row.values.iter().map(|&v| v % q).collect(),
        })
        .collect();
    Ok(RnsPoly::new(row.values.len(), Domain::Coefficient, rows)?)
}

/// Key polys carry all key-chain rows; a level-l switch needs rows 0..=l
/// plus the final (special) row.
fn select_ks_rows(p: &RnsPoly, level: usize) -> RnsPoly {
    let all = p.rows();
    let mut rows: Vec<ResidueRow> = all[..=level].to_vec();
    rows.push(all[all.len() - 1].clone());
    RnsPoly::new(p.n(), p.domain(), rows).expect("selected rows are well formed")
}

/// Exact RNS division by the special prime with rounding: given x over
/// [q_0..q_l, p], returns round(x/p) over [q_0..q_l].
fn divide_by_special(ctx: &Context, x: &RnsPoly, level: usize) -> Result<RnsPoly> {
    x.expect_domain(Domain::Coefficient)?;
    let rows = x.rows();
    let special = &rows[rows.len() - 1];
    let p = special.q;
    let half = p >> 1;
    let mut out_rows = Vec::with_capacity(level + 1);
    for (i, row) in rows[..=level].iter().enumerate() {
        let q = row.q;
        let p_mod = ctx.p_mod_qi()[i];
        let p_inv = ctx.p_inv_qi()[i];
        let values = row
            .values
            .iter()
            .zip(&special.values)
            .map(|(&c, &r)| {
                let r_centered = if r > half {
                    ring_arith::sub_mod(r % q, p_mod, q)
                } else {
                    r % q
                };
                mul_mod(ring_arith::sub_mod(c, r_centered, q), p_inv, q)
            })
            .collect();
        out_rows.push(ResidueRow { q, values });
    }
    Ok(RnsPoly::new(x.n(), Domain::Coefficient, out_rows)?)
}

/// First `keep` rows of a poly (a valid element of the prefix chain).
pub(crate) fn restrict_rows(p: &RnsPoly, keep: usize) -> RnsPoly {
    let rows = p.rows()[..keep].to_vec();
    RnsPoly::new(p.n(), p.domain(), rows).expect("prefix rows are well formed")
}

impl KeySet {
    pub fn galois_key(&self, step: i64) -> Result<&KskKey> {
        self.galois.get(&step).ok_or(CkksError::MissingGaloisKey(step))
    }
}
