//! Property tests for the arithmetic and algebraic laws the rest of the
//! crate leans on.

use proptest::prelude::*;

use padic_skew::{
    chi, skew_canonical_form, theta, ExtInt, FieldSpec, LocalElem, LocalMatrix,
};

fn specs() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        Just(FieldSpec::padic(2, 16).unwrap()),
        Just(FieldSpec::padic(3, 16).unwrap()),
        Just(FieldSpec::padic(5, 16).unwrap()),
        Just(FieldSpec::laurent(3, 16).unwrap()),
        Just(FieldSpec::laurent(7, 16).unwrap()),
    ]
}

/// An arbitrary element: a valuation in a desk-scale range and a seed for
/// the digit string, with a sprinkling of exact zeros.
fn elems(spec: FieldSpec) -> impl Strategy<Value = LocalElem> {
    let nonzero = (-6i64..=6, any::<u64>()).prop_map(move |(v, seed)| {
        let mut rng = padic_skew::stream_rng(seed, 0);
        LocalElem::sample_with_valuation_in(spec, v, v, &mut rng)
    });
    prop_oneof![
        9 => nonzero,
        1 => Just(LocalElem::zero(spec)),
    ]
}

fn spec_and_pair() -> impl Strategy<Value = (FieldSpec, LocalElem, LocalElem)> {
    specs().prop_flat_map(|spec| {
        (Just(spec), elems(spec), elems(spec))
    })
}

fn spec_and_triple() -> impl Strategy<Value = (FieldSpec, LocalElem, LocalElem, LocalElem)> {
    specs().prop_flat_map(|spec| (Just(spec), elems(spec), elems(spec), elems(spec)))
}

proptest! {
    #[test]
    fn ultrametric_inequality((_, a, b) in spec_and_pair()) {
        let sum = a.add(&b).unwrap();
        let lower = a.valuation().min(b.valuation());
        prop_assert!(sum.valuation() >= lower);
        if a.valuation() != b.valuation() {
            prop_assert_eq!(sum.valuation(), lower);
        }
    }

    #[test]
    fn valuations_add_under_multiplication((_, a, b) in spec_and_pair()) {
        let prod = a.mul(&b).unwrap();
        prop_assert_eq!(prod.valuation(), a.valuation() + b.valuation());
    }

    #[test]
    fn addition_commutes((_, a, b) in spec_and_pair()) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
    }

    #[test]
    fn multiplication_associates_within_windows((_, a, b, c) in spec_and_triple()) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.agrees_with(&right));
    }

    #[test]
    fn subtraction_cancels((_, a) in specs().prop_flat_map(|s| (Just(s), elems(s)))) {
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn inverse_round_trips((spec, a) in specs().prop_flat_map(|s| (Just(s), elems(s)))) {
        prop_assume!(!a.is_zero());
        let inv = a.inv().unwrap();
        prop_assert!(a.mul(&inv).unwrap().agrees_with(&LocalElem::one(spec)));
    }

    #[test]
    fn character_is_additive((_, a, b) in spec_and_pair()) {
        // Both sides must be evaluable: keep the windows comfortably wide.
        prop_assume!(a.valuation() >= ExtInt::Int(-6) && b.valuation() >= ExtInt::Int(-6));
        let sum = a.add(&b).unwrap();
        let lhs = chi(&sum).unwrap();
        let rhs = chi(&a).unwrap().mul(&chi(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn theta_sees_only_the_absolute_value((spec, a) in specs().prop_flat_map(|s| (Just(s), elems(s))), useed in any::<u64>()) {
        let mut rng = padic_skew::stream_rng(useed, 1);
        let unit = LocalElem::sample_with_valuation_in(spec, 0, 0, &mut rng);
        let scaled = a.mul(&unit).unwrap();
        prop_assert_eq!(theta(&a), theta(&scaled));
        prop_assert_eq!(theta(&a), theta(&a.neg()));
    }
}

fn random_skew(spec: FieldSpec, size: usize, seed: u64) -> LocalMatrix {
    let mut rng = padic_skew::stream_rng(seed, 2);
    let mut m = LocalMatrix::zeros(spec, size, size);
    for i in 0..size {
        for j in (i + 1)..size {
            let x = LocalElem::sample_with_valuation_in(spec, -4, 4, &mut rng);
            m.set(j, i, x.neg());
            m.set(i, j, x);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_round_trips(seed in any::<u64>(), n in 1usize..=3) {
        let spec = FieldSpec::padic(3, 24).unwrap();
        let a = random_skew(spec, 2 * n, seed);
        let cf = skew_canonical_form(&a).unwrap();
        prop_assert!(cf.reconstruct().unwrap().agrees_with(&a));
        prop_assert!(cf.exponents.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn skew_part_is_skew_and_idempotent_up_to_two(seed in any::<u64>()) {
        let spec = FieldSpec::padic(5, 24).unwrap();
        let mut rng = padic_skew::stream_rng(seed, 3);
        let x = padic_skew::linalg::sample_uniform_matrix(spec, 3, 3, &mut rng);
        let t = x.skew_part().unwrap();
        prop_assert!(t.is_skew());
        let two = LocalElem::from_int(spec, 2);
        prop_assert!(t.skew_part().unwrap().agrees_with(&t.scale(&two).unwrap()));
    }
}
