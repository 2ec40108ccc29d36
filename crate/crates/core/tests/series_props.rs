mod common;

use armlin::{Exact, MultiIndex, Scalar, Series, SeriesTuple};
use common::{max_relative_gap, random_nonlinear, random_polynomial, rng};
use num_complex::Complex64;
use proptest::prelude::*;

fn mi(e: &[i32]) -> MultiIndex {
    MultiIndex::new(e.to_vec())
}

fn q(p: i64, d: i64) -> Exact {
    Exact::from_ratio(p, d)
}

/// `id + a` for a random nonlinear `a`.
fn random_tangent<C: Scalar>(seed: u8, dim: usize, cap: u32) -> SeriesTuple<C> {
    let a = random_nonlinear::<C>(&mut rng(seed), dim, cap, cap.min(4), 3);
    SeriesTuple::identity(dim, cap).add(&a).unwrap()
}

#[test]
fn products_and_truncation() {
    let one_plus = Series::from_terms(1, 2, [(mi(&[0]), q(1, 1)), (mi(&[1]), q(1, 1))]).unwrap();
    let one_minus = Series::from_terms(1, 2, [(mi(&[0]), q(1, 1)), (mi(&[1]), q(-1, 1))]).unwrap();
    let expected = Series::from_terms(1, 2, [(mi(&[0]), q(1, 1)), (mi(&[2]), q(-1, 1))]).unwrap();
    assert_eq!(one_plus.mul(&one_minus).unwrap(), expected);

    let z1z2 = Series::monomial(2, 2, mi(&[1, 1]), q(1, 1)).unwrap();
    let z2 = Series::<Exact>::variable(2, 2, 1);
    assert!(z1z2.mul(&z2).unwrap().is_empty());

    let sum = Series::<Exact>::variable(2, 2, 0).add(&z2).unwrap();
    let sq = sum.mul(&sum).unwrap();
    assert_eq!(sq.coeff(&mi(&[2, 0])), q(1, 1));
    assert_eq!(sq.coeff(&mi(&[1, 1])), q(2, 1));
    assert_eq!(sq.coeff(&mi(&[0, 2])), q(1, 1));
    assert_eq!(sq.len(), 3);
}

#[test]
fn composition_examples() {
    let v = SeriesTuple::new(vec![Series::from_terms(1, 3, [(mi(&[1]), q(1, 1)), (mi(&[2]), q(1, 1))]).unwrap()])
        .unwrap();
    let z = Series::<Exact>::variable(1, 3, 0);
    assert_eq!(z.compose(&v).unwrap(), v.component(0).clone());
    let z2 = z.mul(&z).unwrap();
    let expected = Series::from_terms(1, 3, [(mi(&[2]), q(1, 1)), (mi(&[3]), q(2, 1))]).unwrap();
    assert_eq!(z2.compose(&v).unwrap(), expected);
}

#[test]
fn derivation_examples() {
    let lin = SeriesTuple::new(vec![
        Series::monomial(2, 4, mi(&[1, 0]), q(2, 1)).unwrap(),
        Series::monomial(2, 4, mi(&[0, 1]), q(5, 1)).unwrap(),
    ])
    .unwrap();
    let phi = Series::monomial(2, 4, mi(&[2, 1]), q(1, 1)).unwrap();
    // λ·m = 2·2 + 5·1
    assert_eq!(lin.derive(&phi).unwrap().series, phi.scale(&q(9, 1)));

    let squares = SeriesTuple::new(vec![
        Series::monomial(2, 4, mi(&[2, 0]), q(1, 1)).unwrap(),
        Series::monomial(2, 4, mi(&[0, 2]), q(1, 1)).unwrap(),
    ])
    .unwrap();
    let z1z2 = Series::monomial(2, 4, mi(&[1, 1]), q(1, 1)).unwrap();
    let expected = Series::from_terms(2, 4, [(mi(&[2, 1]), q(1, 1)), (mi(&[1, 2]), q(1, 1))]).unwrap();
    assert_eq!(squares.derive(&z1z2).unwrap().series, expected);
}

#[test]
fn inversion_examples() {
    let f = SeriesTuple::new(vec![Series::from_terms(1, 3, [(mi(&[1]), q(1, 1)), (mi(&[2]), q(-1, 1))]).unwrap()])
        .unwrap();
    let w = f.invert_tangent_identity().unwrap();
    let expected = Series::from_terms(1, 3, [(mi(&[1]), q(1, 1)), (mi(&[2]), q(1, 1)), (mi(&[3]), q(2, 1))]).unwrap();
    assert_eq!(w.component(0), &expected);
    let id = SeriesTuple::<Exact>::identity(3, 5);
    assert_eq!(id.invert_tangent_identity().unwrap(), id);
}

#[test]
fn majorant_examples() {
    let phi = Series::from_terms(1, 2, [(mi(&[1]), q(-1, 1)), (mi(&[2]), q(1, 1))]).unwrap();
    let psi = Series::from_terms(1, 2, [(mi(&[1]), q(1, 1)), (mi(&[2]), q(1, 1))]).unwrap();
    assert!(psi.majorizes(&phi).unwrap());
    assert!(psi.majorizes(&psi).unwrap());
    let two_z = Series::monomial(1, 2, mi(&[1]), q(2, 1)).unwrap();
    let z = Series::<Exact>::variable(1, 2, 0);
    assert!(!z.majorizes(&two_z).unwrap());
    assert!(phi.majorizes(&z).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_of_product_is_superadditive(seed in any::<u8>(), dim in 1usize..=3, cap in 2u32..=7) {
        let mut r = rng(seed);
        let f = random_polynomial::<Exact>(&mut r, dim, cap, 4);
        let g = random_nonlinear::<Exact>(&mut r, dim, cap, cap.min(4), 2).component(0).clone();
        let p = f.mul(&g).unwrap();
        match (f.order(), g.order(), p.order()) {
            (Some(a), Some(b), Some(c)) => prop_assert!(c >= a + b),
            (_, _, None) => {}
            (a, b, c) => prop_assert!(false, "order of product {c:?} from {a:?}, {b:?}"),
        }
    }

    #[test]
    fn composition_is_associative_exactly(seed in any::<u8>(), dim in 1usize..=2, cap in 2u32..=6) {
        let u = random_tangent::<Exact>(seed, dim, cap);
        let v = random_tangent::<Exact>(seed.wrapping_add(101), dim, cap);
        let phi = random_polynomial::<Exact>(&mut rng(seed.wrapping_add(7)), dim, cap, 5);
        let left = phi.compose(&u).unwrap().compose(&v).unwrap();
        let right = phi.compose(&u.compose(&v).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composition_is_associative_in_floats(seed in any::<u8>(), dim in 1usize..=3, cap in 2u32..=6) {
        let u = random_tangent::<Complex64>(seed, dim, cap);
        let v = random_tangent::<Complex64>(seed.wrapping_add(33), dim, cap);
        let w = random_tangent::<Complex64>(seed.wrapping_add(66), dim, cap);
        let left = w.compose(&u).unwrap().compose(&v).unwrap();
        let right = w.compose(&u.compose(&v).unwrap()).unwrap();
        prop_assert!(max_relative_gap(&left, &right) <= 1e-12);
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u8>(), dim in 1usize..=3, cap in 2u32..=6) {
        let f = random_tangent::<Exact>(seed, dim, cap);
        let w = f.invert_tangent_identity().unwrap();
        let id = SeriesTuple::identity(dim, cap);
        prop_assert_eq!(&f.compose(&w).unwrap(), &id);
        prop_assert_eq!(&w.compose(&f).unwrap(), &id);
    }

    #[test]
    fn identity_composition_is_neutral(seed in any::<u8>(), dim in 1usize..=3, cap in 1u32..=6) {
        let phi = random_polynomial::<Exact>(&mut rng(seed), dim, cap, 6);
        prop_assert_eq!(phi.compose(&SeriesTuple::identity(dim, cap)).unwrap(), phi);
    }

    #[test]
    fn json_round_trip(seed in any::<u8>(), dim in 1usize..=3, cap in 1u32..=6) {
        let phi = random_polynomial::<Exact>(&mut rng(seed), dim, cap, 6);
        prop_assert_eq!(Series::<Exact>::from_json(&phi.to_json()).unwrap(), phi);
    }
}
