//! Binary wire formats.
//!
//! Ciphertext frame: magic `CKT1`, format version u16, level u8, part
//! count u8, scale exponent i16, context fingerprint u64, then per-part
//! per-prime coefficient arrays (canonical coefficient domain) as
//! little-endian u64, and a trailing CRC32 over everything before it.
//! Integers are little-endian throughout.

use ring_arith::{Domain, ResidueRow, RnsPoly};

use crate::cipher::Ciphertext;
use crate::context::Context;
use crate::keys::{KeySet, KskKey, PublicKey, SecretKey};
use crate::{CkksError, Result};

const CT_MAGIC: &[u8; 4] = b"CKT1";
const KEY_MAGIC: &[u8; 4] = b"CKK1";
const FORMAT_VERSION: u16 = 1;

/// Serializes a ciphertext into the portable coefficient-domain frame.
pub fn serialize_ciphertext(ctx: &Context, ct: &Ciphertext) -> Result<Vec<u8>> {
    let chain = ctx.level_chain(ct.level)?;
    let level = u8::try_from(ct.level).map_err(|_| CkksError::Parse("level exceeds u8".into()))?;
    let parts =
        u8::try_from(ct.part_count()).map_err(|_| CkksError::Parse("too many parts".into()))?;
    let scale = i16::try_from(ct.scale_log2)
        .map_err(|_| CkksError::Parse("scale exponent exceeds i16".into()))?;

    let n = ctx.n();
    let rows = ct.level + 1;
    let payload = ct.part_count() * rows * n * 8;
    let mut out = Vec::with_capacity(18 + payload + 4);
    out.extend_from_slice(CT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(level);
    out.push(parts);
    out.extend_from_slice(&scale.to_le_bytes());
    out.extend_from_slice(&ctx.fingerprint().to_le_bytes());
    for part in ct.parts() {
        let coeff = chain.ntt_inverse(part)?;
        for row in coeff.rows() {
            for &v in &row.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Parses a ciphertext frame, validating structure, context fingerprint,
/// residue ranges, and the trailing checksum.
pub fn deserialize_ciphertext(ctx: &Context, bytes: &[u8]) -> Result<Ciphertext> {
    if bytes.len() < 22 {
        return Err(CkksError::Parse("frame truncated before header".into()));
    }
    if &bytes[0..4] != CT_MAGIC {
        return Err(CkksError::Parse("bad magic".into()));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().expect("2 bytes"));
    if version != FORMAT_VERSION {
        return Err(CkksError::Parse(format!("unsupported format version {version}")));
    }
    let level = bytes[6] as usize;
    let parts = bytes[7] as usize;
    let scale_log2 = i16::from_le_bytes(bytes[8..10].try_into().expect("2 bytes")) as i32;
    let fingerprint = u64::from_le_bytes(bytes[10..18].try_into().expect("8 bytes"));
    if fingerprint != ctx.fingerprint() {
        return Err(CkksError::ContextMismatch);
    }
    if level > ctx.top_level() {
        return Err(CkksError::Parse(format!("level {level} out of range")));
    }
    if !(2..=3).contains(&parts) {
        return Err(CkksError::Parse(format!("part count {parts} out of range")));
    }
    let n = ctx.n();
    let rows = level + 1;
    let expected = 18 + parts * rows * n * 8 + 4;
    if bytes.len() != expected {
        return Err(CkksError::Parse(format!(
            "frame length {} does not match expected {expected}",
            bytes.len()
        )));
    }
    let body_end = bytes.len() - 4;
    let stored_crc = u32::from_le_bytes(bytes[body_end..].try_into().expect("4 bytes"));
    if crc32fast::hash(&bytes[..body_end]) != stored_crc {
        return Err(CkksError::Parse("checksum mismatch".into()));
    }

    let chain = ctx.level_chain(level)?;
    let moduli = chain.moduli();
    let mut offset = 18;
    let mut poly_parts = Vec::with_capacity(parts);
    for _ in 0..parts {
        let mut poly_rows = Vec::with_capacity(rows);
        for &q in &moduli {
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let v = u64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"));
                if v >= q {
                    return Err(CkksError::Parse(format!("residue {v} >= modulus {q}")));
                }
                values.push(v);
                offset += 8;
            }
            poly_rows.push(ResidueRow { q, values });
        }
        let coeff = RnsPoly::new(n, Domain::Coefficient, poly_rows)?;
        poly_parts.push(chain.ntt_forward(&coeff)?);
    }
    Ok(Ciphertext {
        parts: poly_parts,
        scale_log2,
        level,
        noise_budget_bits: 0.0, // not carried on the wire
    })
}

// --- key material framing (evaluation domain, local storage) ---

fn write_poly(out: &mut Vec<u8>, p: &RnsPoly) {
    out.push(p.level_count() as u8);
    for row in p.rows() {
        for &v in &row.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn read_poly(ctx: &Context, bytes: &[u8], offset: &mut usize, key_chain: bool) -> Result<RnsPoly> {
    let n = ctx.n();
    let take = |off: &mut usize, len: usize| -> Result<&[u8]> {
        let end = *off + len;
        if end > bytes.len() {
            return Err(CkksError::Parse("key frame truncated".into()));
        }
        let s = &bytes[*off..end];
        *off = end;
        Ok(s)
    };
    let rows = take(offset, 1)?[0] as usize;
    let moduli = if key_chain {
        ctx.key_chain().moduli()
    } else {
        ctx.data_chain().moduli()
    };
    if rows == 0 || rows > moduli.len() {
        return Err(CkksError::Parse(format!("bad key row count {rows}")));
    }
    let mut poly_rows = Vec::with_capacity(rows);
    for &q in &moduli[..rows] {
        let raw = take(offset, n * 8)?;
        let mut values = Vec::with_capacity(n);
        for chunk in raw.chunks_exact(8) {
            let v = u64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            if v >= q {
                return Err(CkksError::Parse("key residue out of range".into()));
            }
            values.push(v);
        }
        poly_rows.push(ResidueRow { q, values });
    }
    Ok(RnsPoly::new(n, Domain::Evaluation, poly_rows)?)
}

fn key_frame(ctx: &Context, kind: u8, body: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 19);
    out.extend_from_slice(KEY_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(kind);
    out.extend_from_slice(&ctx.fingerprint().to_le_bytes());
    out.extend_from_slice(&body);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn open_key_frame<'a>(ctx: &Context, kind: u8, bytes: &'a [u8]) -> Result<&'a [u8]> {
    if bytes.len() < 19 {
        return Err(CkksError::Parse("key frame truncated".into()));
    }
    if &bytes[0..4] != KEY_MAGIC {
        return Err(CkksError::Parse("bad key magic".into()));
    }
    if u16::from_le_bytes(bytes[4..6].try_into().expect("2 bytes")) != FORMAT_VERSION {
        return Err(CkksError::Parse("unsupported key format version".into()));
    }
    if bytes[6] != kind {
        return Err(CkksError::Parse(format!("key kind {} != {kind}", bytes[6])));
    }
    if u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes")) != ctx.fingerprint() {
        return Err(CkksError::ContextMismatch);
    }
    let body_end = bytes.len() - 4;
    let crc = u32::from_le_bytes(bytes[body_end..].try_into().expect("4 bytes"));
    if crc32fast::hash(&bytes[..body_end]) != crc {
        return Err(CkksError::Parse("key checksum mismatch".into()));
    }
    Ok(&bytes[15..body_end])
}

impl SecretKey {
    pub fn to_bytes(&self, ctx: &Context) -> Vec<u8> {
        let mut body = Vec::new();
        write_poly(&mut body, &self.s);
        key_frame(ctx, 0, body)
    }

    pub fn from_bytes(ctx: &Context, bytes: &[u8]) -> Result<Self> {
        let body = open_key_frame(ctx, 0, bytes)?;
        let mut off = 0;
        let s = read_poly(ctx, body, &mut off, true)?;
        Ok(Self { s })
    }
}

impl PublicKey {
    pub fn to_bytes(&self, ctx: &Context) -> Vec<u8> {
        let mut body = Vec::new();
        write_poly(&mut body, &self.b);
        write_poly(&mut body, &self.a);
        key_frame(ctx, 1, body)
    }

    pub fn from_bytes(ctx: &Context, bytes: &[u8]) -> Result<Self> {
        let body = open_key_frame(ctx, 1, bytes)?;
        let mut off = 0;
        let b = read_poly(ctx, body, &mut off, false)?;
        let a = read_poly(ctx, body, &mut off, false)?;
        Ok(Self { b, a })
    }
}

impl KskKey {
    fn write_body(&self, body: &mut Vec<u8>) {
        body.push(self.pairs.len() as u8);
        for (b, a) in &self.pairs {
            write_poly(body, b);
            write_poly(body, a);
        }
    }

    fn read_body(ctx: &Context, body: &[u8], off: &mut usize) -> Result<Self> {
        if *off >= body.len() {
            return Err(CkksError::Parse("key frame truncated".into()));
        }
        let count = body[*off] as usize;
        *off += 1;
        let mut pairs = Vec::with_capacity(count);
        for _ in 0..count {
            let b = read_poly(ctx, body, off, true)?;
            let a = read_poly(ctx, body, off, true)?;
            pairs.push((b, a));
        }
        Ok(Self { pairs })
    }

    pub fn to_bytes(&self, ctx: &Context) -> Vec<u8> {
        let mut body = Vec::new();
        self.write_body(&mut body);
        key_frame(ctx, 2, body)
    }

    pub fn from_bytes(ctx: &Context, bytes: &[u8]) -> Result<Self> {
        let body = open_key_frame(ctx, 2, bytes)?;
        let mut off = 0;
        Self::read_body(ctx, body, &mut off)
    }
}

impl KeySet {
    /// Serializes the evaluation keys (public, relin, galois) — everything
    /// a server is allowed to hold.
    pub fn evaluation_keys_to_bytes(&self, ctx: &Context) -> Vec<u8> {
        let mut body = Vec::new();
        let pk = self.public.to_bytes(ctx);
        body.extend_from_slice(&(pk.len() as u32).to_le_bytes());
        body.extend_from_slice(&pk);
        let rlk = self.relin.to_bytes(ctx);
        body.extend_from_slice(&(rlk.len() as u32).to_le_bytes());
        body.extend_from_slice(&rlk);
        body.extend_from_slice(&(self.galois.len() as u16).to_le_bytes());
        for (&step, key) in &self.galois {
            body.extend_from_slice(&step.to_le_bytes());
            let kb = key.to_bytes(ctx);
            body.extend_from_slice(&(kb.len() as u32).to_le_bytes());
            body.extend_from_slice(&kb);
        }
        key_frame(ctx, 3, body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::keygen;
    use crate::params::{CkksParams, Profile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn toy_ct() -> (Context, Ciphertext) {
        let ctx = Context::new(CkksParams::profile(Profile::Toy)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let keys = keygen(&ctx, &mut rng).unwrap();
        let values: Vec<f64> = (0..ctx.slot_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ct = ctx
            .encrypt(&ctx.encode(&values).unwrap(), &keys.public, &mut rng)
            .unwrap();
        (ctx, ct)
    }

    #[test]
    fn ciphertext_roundtrip_is_bit_identical() {
        let (ctx, ct) = toy_ct();
        let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
        let back = deserialize_ciphertext(&ctx, &bytes).unwrap();
        assert_eq!(back.parts, ct.parts);
        assert_eq!(back.scale_log2, ct.scale_log2);
        assert_eq!(back.level, ct.level);
        let again = serialize_ciphertext(&ctx, &back).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn corruption_is_always_detected() {
        let (ctx, ct) = toy_ct();
        let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
        // flip one bit in a spread of positions, including header and body
        for &pos in &[0usize, 5, 7, 12, 30, bytes.len() / 2, bytes.len() - 5] {
            let mut bad = bytes.clone();
            bad[pos] ^= 0x40;
            assert!(
                deserialize_ciphertext(&ctx, &bad).is_err(),
                "corruption at byte {pos} went unnoticed"
            );
        }
        // truncation
        assert!(deserialize_ciphertext(&ctx, &bytes[..bytes.len() - 9]).is_err());
        assert!(deserialize_ciphertext(&ctx, &[]).is_err());
    }

    #[test]
    fn wrong_context_is_rejected() {
        let (ctx, ct) = toy_ct();
        let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
        let other = Context::new(CkksParams::new(32, vec![40, 30, 40], 20).unwrap()).unwrap();
        assert!(matches!(
            deserialize_ciphertext(&other, &bytes),
            Err(CkksError::ContextMismatch)
        ));
    }

    #[test]
    fn key_material_roundtrips() {
        let ctx = Context::new(CkksParams::profile(Profile::Toy)).unwrap();
        let keys = keygen(&ctx, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();

        let sk = SecretKey::from_bytes(&ctx, &keys.secret.to_bytes(&ctx)).unwrap();
        assert_eq!(sk, keys.secret);
        let pk = PublicKey::from_bytes(&ctx, &keys.public.to_bytes(&ctx)).unwrap();
        assert_eq!(pk, keys.public);
        let rlk = KskKey::from_bytes(&ctx, &keys.relin.to_bytes(&ctx)).unwrap();
        assert_eq!(rlk, keys.relin);
        // galois step-1 key serializes and recovers
        let gk = keys.galois_key(1).unwrap();
        let gk2 = KskKey::from_bytes(&ctx, &gk.to_bytes(&ctx)).unwrap();
        assert_eq!(&gk2, gk);
        // aggregate evaluation-key blob parses its frame
        let blob = keys.evaluation_keys_to_bytes(&ctx);
        assert!(blob.len() > 19);
    }

    #[test]
    fn serialized_size_grows_linearly_in_degree() {
        let mut sizes = Vec::new();
        for n in [1024usize, 2048, 4096, 8192] {
            let ctx = Context::new(CkksParams::new(n, vec![60, 40, 40, 60], 40).unwrap()).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(3);
            let keys = keygen(&ctx, &mut rng).unwrap();
            let ct = ctx
                .encrypt(&ctx.encode(&[0.5, -0.25]).unwrap(), &keys.public, &mut rng)
                .unwrap();
            let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
            sizes.push((n as f64, bytes.len() as f64));
        }
        // least-squares fit; R^2 must exceed 0.99 with positive slope
        let n = sizes.len() as f64;
        let sx: f64 = sizes.iter().map(|p| p.0).sum();
        let sy: f64 = sizes.iter().map(|p| p.1).sum();
        let sxx: f64 = sizes.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = sizes.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let mean_y = sy / n;
        let ss_res: f64 = sizes
            .iter()
            .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
            .sum();
        let ss_tot: f64 = sizes.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
        let r2 = 1.0 - ss_res / ss_tot;
        assert!(slope > 0.0);
        assert!(r2 > 0.99, "R^2 = {r2}");
    }
}
