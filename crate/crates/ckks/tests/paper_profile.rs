//! Precision checks at the full parameter set (n = 8192, [60,40,40,60],
//! scale 2^40). One shared context and key set keep the suite fast.

use std::sync::OnceLock;

use ckks::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Setup {
    ctx: Context,
    keys: KeySet,
}

fn setup() -> &'static Setup {
    static SETUP: OnceLock<Setup> = OnceLock::new();
    SETUP.get_or_init(|| {
        let ctx = Context::new(CkksParams::profile(Profile::Paper)).expect("paper params");
        let keys = keygen(&ctx, &mut ChaCha20Rng::seed_from_u64(0xC0FFEE)).expect("keygen");
        Setup { ctx, keys }
    })
}

fn random_values(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn encrypt_decrypt_roundtrip_1024_values() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let values = random_values(1024, 10);
    let ct = s
        .ctx
        .encrypt(&s.ctx.encode(&values).unwrap(), &s.keys.public, &mut rng)
        .unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&ct, &s.keys.secret).unwrap()).unwrap();
    let err = max_abs_diff(&values, &out[..1024]);
    assert!(err <= 1e-5, "roundtrip error {err}");
}

#[test]
fn encrypt_decrypt_zeros() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let zeros = vec![0.0; s.ctx.slot_count()];
    let ct = s
        .ctx
        .encrypt(&s.ctx.encode(&zeros).unwrap(), &s.keys.public, &mut rng)
        .unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&ct, &s.keys.secret).unwrap()).unwrap();
    assert!(out.iter().all(|&v| v.abs() <= 1e-5));
}

#[test]
fn homomorphic_add_two_vectors() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let v = random_values(s.ctx.slot_count(), 20);
    let w = random_values(s.ctx.slot_count(), 21);
    let ct_v = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let ct_w = s.ctx.encrypt(&s.ctx.encode(&w).unwrap(), &s.keys.public, &mut rng).unwrap();
    let sum = s.ctx.add(&ct_v, &ct_w).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&sum, &s.keys.secret).unwrap()).unwrap();
    let expected: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
    assert!(max_abs_diff(&expected, &out) <= 1e-4);
}

#[test]
fn homomorphic_sum_of_32_ciphertexts_stays_bounded() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let vectors: Vec<Vec<f64>> = (0..32).map(|i| random_values(256, 100 + i)).collect();
    let mut acc = s
        .ctx
        .encrypt(&s.ctx.encode(&vectors[0]).unwrap(), &s.keys.public, &mut rng)
        .unwrap();
    for v in &vectors[1..] {
        let ct = s.ctx.encrypt(&s.ctx.encode(v).unwrap(), &s.keys.public, &mut rng).unwrap();
        acc = s.ctx.add(&acc, &ct).unwrap();
    }
    let out = s.ctx.decode(&s.ctx.decrypt(&acc, &s.keys.secret).unwrap()).unwrap();
    let mut expected = vec![0.0; 256];
    for v in &vectors {
        for (e, x) in expected.iter_mut().zip(v) {
            *e += x;
        }
    }
    // ten-ciphertext bound from the aggregation path, extended to 32 adds
    assert!(max_abs_diff(&expected, &out[..256]) <= 1e-4);
}

#[test]
fn sum_of_ten_matches_plaintext_sum() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let vectors: Vec<Vec<f64>> = (0..10).map(|i| random_values(1024, 500 + i)).collect();
    let mut acc: Option<Ciphertext> = None;
    for v in &vectors {
        let ct = s.ctx.encrypt(&s.ctx.encode(v).unwrap(), &s.keys.public, &mut rng).unwrap();
        acc = Some(match acc {
            None => ct,
            Some(prev) => s.ctx.add(&prev, &ct).unwrap(),
        });
    }
    let out = s
        .ctx
        .decode(&s.ctx.decrypt(&acc.unwrap(), &s.keys.secret).unwrap())
        .unwrap();
    let mut expected = vec![0.0; 1024];
    for v in &vectors {
        for (e, x) in expected.iter_mut().zip(v) {
            *e += x;
        }
    }
    assert!(max_abs_diff(&expected, &out[..1024]) <= 1e-3);
}

#[test]
fn multiply_by_encoded_one_is_identity() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let v = random_values(512, 30);
    let ct = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let ones = s.ctx.encode(&vec![1.0; s.ctx.slot_count()]).unwrap();
    let prod = s.ctx.rescale(&s.ctx.mul_plain(&ct, &ones).unwrap()).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&prod, &s.keys.secret).unwrap()).unwrap();
    assert!(max_abs_diff(&v, &out[..512]) <= 1e-4);
}

#[test]
fn multiply_fours_by_quarter() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let fours = vec![4.0; 128];
    let ct = s.ctx.encrypt(&s.ctx.encode(&fours).unwrap(), &s.keys.public, &mut rng).unwrap();
    let quarter = s.ctx.encode(&vec![0.25; s.ctx.slot_count()]).unwrap();
    let prod = s.ctx.rescale(&s.ctx.mul_plain(&ct, &quarter).unwrap()).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&prod, &s.keys.secret).unwrap()).unwrap();
    assert!(out[..128].iter().all(|&x| (x - 1.0).abs() <= 1e-4));
}

#[test]
fn plain_product_matches_oracle() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let v = random_values(1024, 40);
    let c = random_values(s.ctx.slot_count(), 41);
    let ct = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let pt = s.ctx.encode(&c).unwrap();
    let prod = s.ctx.rescale(&s.ctx.mul_plain(&ct, &pt).unwrap()).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&prod, &s.keys.secret).unwrap()).unwrap();
    let expected: Vec<f64> = v.iter().zip(&c).map(|(a, b)| a * b).collect();
    assert!(max_abs_diff(&expected, &out[..1024]) <= 1e-4);
}

#[test]
fn ciphertext_product_with_relinearization() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let v = random_values(1024, 50);
    let w = random_values(1024, 51);
    let ct_v = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let ct_w = s.ctx.encrypt(&s.ctx.encode(&w).unwrap(), &s.keys.public, &mut rng).unwrap();
    let raw = s.ctx.mul(&ct_v, &ct_w).unwrap();
    assert_eq!(raw.part_count(), 3);
    let relin = s.ctx.relinearize(&raw, &s.keys.relin).unwrap();
    let prod = s.ctx.rescale(&relin).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&prod, &s.keys.secret).unwrap()).unwrap();
    let expected: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a * b).collect();
    let err = max_abs_diff(&expected, &out[..1024]);
    assert!(err <= 1e-3, "relinearized product error {err}");
}

#[test]
fn multiply_by_encrypted_ones_is_identity() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let v = random_values(512, 60);
    let ct_v = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let ones = vec![1.0; s.ctx.slot_count()];
    let ct_1 = s.ctx.encrypt(&s.ctx.encode(&ones).unwrap(), &s.keys.public, &mut rng).unwrap();
    let prod = s
        .ctx
        .rescale(&s.ctx.relinearize(&s.ctx.mul(&ct_v, &ct_1).unwrap(), &s.keys.relin).unwrap())
        .unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&prod, &s.keys.secret).unwrap()).unwrap();
    assert!(max_abs_diff(&v, &out[..512]) <= 1e-3);
}

#[test]
fn rescale_recovers_value_encoded_at_squared_scale() {
    let s = setup();
    let scale = s.ctx.params().scale_log2;
    let v = random_values(1024, 70);
    let pt = s.ctx.encode_at(&v, scale * 2, s.ctx.top_level()).unwrap();
    let rescaled = {
        // plaintext-level rescale through the ring operation
        let chain = s.ctx.level_chain(s.ctx.top_level()).unwrap();
        let poly = chain.rescale_drop_prime(&pt.poly).unwrap();
        Plaintext {
            poly,
            scale_log2: scale,
            level: s.ctx.top_level() - 1,
        }
    };
    let out = s.ctx.decode(&rescaled).unwrap();
    let err = max_abs_diff(&v, &out[..1024]);
    assert!(err <= 1e-6, "rescaled decode error {err}");
}

#[test]
fn rotation_by_one_shifts_slots_left() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let v = random_values(s.ctx.slot_count(), 80);
    let ct = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let rot = s.ctx.rotate(&ct, 1, s.keys.galois_key(1).unwrap()).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&rot, &s.keys.secret).unwrap()).unwrap();
    let mut expected = v.clone();
    expected.rotate_left(1);
    let err = max_abs_diff(&expected, &out);
    assert!(err <= 1e-4, "rotation error {err}");
}

#[test]
fn serialization_roundtrips_at_full_degree() {
    let s = setup();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let v = random_values(s.ctx.slot_count(), 90);
    let ct = s.ctx.encrypt(&s.ctx.encode(&v).unwrap(), &s.keys.public, &mut rng).unwrap();
    let bytes = serialize_ciphertext(&s.ctx, &ct).unwrap();
    let back = deserialize_ciphertext(&s.ctx, &bytes).unwrap();
    let out = s.ctx.decode(&s.ctx.decrypt(&back, &s.keys.secret).unwrap()).unwrap();
    assert!(max_abs_diff(&v, &out) <= 1e-5);
}
