//! Ring-axiom property tests on random triples.

use proptest::prelude::*;
use ring_arith::*;

fn chain_n8() -> Chain {
    Chain::generate(8, &[30, 20]).unwrap()
}

fn poly_strategy() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(any::<u64>(), 8)
}

fn build(chain: &Chain, raw: &[u64]) -> RnsPoly {
    let rows = chain
        .moduli()
        .iter()
        .map(|&q| ResidueRow {
            q,
            values: raw.iter().map(|&v| v % q).collect(),
        })
        .collect();
    RnsPoly::new(8, Domain::Coefficient, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn add_commutes_and_associates(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        let chain = chain_n8();
        let (a, b, c) = (build(&chain, &a), build(&chain, &b), build(&chain, &c));
        prop_assert_eq!(poly_add(&a, &b).unwrap(), poly_add(&b, &a).unwrap());
        let left = poly_add(&poly_add(&a, &b).unwrap(), &c).unwrap();
        let right = poly_add(&a, &poly_add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn mul_commutes_associates_distributes(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        let chain = chain_n8();
        let fa = chain.ntt_forward(&build(&chain, &a)).unwrap();
        let fb = chain.ntt_forward(&build(&chain, &b)).unwrap();
        let fc = chain.ntt_forward(&build(&chain, &c)).unwrap();

        prop_assert_eq!(poly_mul(&fa, &fb).unwrap(), poly_mul(&fb, &fa).unwrap());

        let assoc_l = poly_mul(&poly_mul(&fa, &fb).unwrap(), &fc).unwrap();
        let assoc_r = poly_mul(&fa, &poly_mul(&fb, &fc).unwrap()).unwrap();
        prop_assert_eq!(assoc_l, assoc_r);

        let distr_l = poly_mul(&fa, &poly_add(&fb, &fc).unwrap()).unwrap();
        let distr_r = poly_add(&poly_mul(&fa, &fb).unwrap(), &poly_mul(&fa, &fc).unwrap()).unwrap();
        prop_assert_eq!(distr_l, distr_r);
    }

    #[test]
    fn sub_is_add_of_negation(a in poly_strategy(), b in poly_strategy()) {
        let chain = chain_n8();
        let (a, b) = (build(&chain, &a), build(&chain, &b));
        prop_assert_eq!(
            poly_sub(&a, &b).unwrap(),
            poly_add(&a, &poly_negate(&b)).unwrap()
        );
    }
}
