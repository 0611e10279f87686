//! Strategies and property checks for the semiring operations.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};
use prov_obda::semiring::{
    mono_mul, mono_remove, parse_polynomial, poly_add, poly_contains, poly_mul, Monomial,
    Polynomial, ProvVariable, SemiringMode,
};

pub type Checked = Result<(), TestCaseError>;

const VARS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(super::seed_base()),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn mode() -> impl Strategy<Value = SemiringMode> {
    prop_oneof![
        Just(SemiringMode::Free),
        Just(SemiringMode::MultIdempotent),
        Just(SemiringMode::FullyIdempotent),
    ]
}

pub fn factors() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(&VARS[..]), 0..5)
}

pub fn monomial(mode: SemiringMode) -> impl Strategy<Value = Monomial> {
    factors().prop_map(move |f| Monomial::from_factors(f, mode))
}

pub fn polynomial(mode: SemiringMode) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(monomial(mode), 0..4).prop_map(move |t| Polynomial::from_terms(t, mode))
}

pub fn with_mode<T: std::fmt::Debug>(
    f: impl Fn(SemiringMode) -> BoxedStrategy<T>,
) -> impl Strategy<Value = (SemiringMode, T)> {
    mode().prop_flat_map(move |m| f(m).prop_map(move |v| (m, v)))
}

pub fn three_monomials(m: SemiringMode) -> BoxedStrategy<(Monomial, Monomial, Monomial)> {
    (monomial(m), monomial(m), monomial(m)).boxed()
}

pub fn three_polynomials(m: SemiringMode) -> BoxedStrategy<(Polynomial, Polynomial, Polynomial)> {
    (polynomial(m), polynomial(m), polynomial(m)).boxed()
}

/// A polynomial together with a sub-multiset of its terms and a
/// sub-multiset of that.
pub fn chain(m: SemiringMode) -> BoxedStrategy<(Polynomial, Polynomial, Polynomial)> {
    polynomial(m)
        .prop_flat_map(move |x| {
            let n = x.len();
            (
                Just(x),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(move |(x, keep_y, keep_z)| {
            let pick = |from: &[Monomial], keep: &[bool]| -> Vec<Monomial> {
                from.iter()
                    .zip(keep)
                    .filter(|(_, k)| **k)
                    .map(|(t, _)| t.clone())
                    .collect()
            };
            let y = pick(x.terms(), &keep_y);
            let z = pick(&y, &keep_z);
            (x, Polynomial::from_terms(y, m), Polynomial::from_terms(z, m))
        })
        .boxed()
}

pub fn monomial_monoid(m: SemiringMode, a: &Monomial, b: &Monomial, c: &Monomial) -> Checked {
    prop_assert_eq!(mono_mul(a, &mono_mul(b, c, m), m), mono_mul(&mono_mul(a, b, m), c, m));
    prop_assert_eq!(mono_mul(a, b, m), mono_mul(b, a, m));
    prop_assert_eq!(&mono_mul(a, &Monomial::one(), m), a);
    Ok(())
}

pub fn commutative_semiring(m: SemiringMode, a: &Polynomial, b: &Polynomial, c: &Polynomial) -> Checked {
    prop_assert_eq!(poly_add(a, &poly_add(b, c, m), m), poly_add(&poly_add(a, b, m), c, m));
    prop_assert_eq!(poly_mul(a, &poly_mul(b, c, m), m), poly_mul(&poly_mul(a, b, m), c, m));
    prop_assert_eq!(poly_add(a, b, m), poly_add(b, a, m));
    prop_assert_eq!(poly_mul(a, b, m), poly_mul(b, a, m));
    prop_assert_eq!(
        poly_mul(a, &poly_add(b, c, m), m),
        poly_add(&poly_mul(a, b, m), &poly_mul(a, c, m), m)
    );
    prop_assert_eq!(&poly_add(a, &Polynomial::zero(), m), a);
    prop_assert_eq!(&poly_mul(a, &Polynomial::one(), m), a);
    prop_assert_eq!(poly_mul(a, &Polynomial::zero(), m), Polynomial::zero());
    Ok(())
}

/// Under fidem, `p ⊗ p` equals `p` term by term but keeps cross products
/// of distinct terms, so `p ⊆ p ⊗ p` is all that holds for sums.
pub fn mode_idempotency(m: SemiringMode, a: &Polynomial) -> Checked {
    for t in a.terms() {
        if m.mult_idempotent() {
            prop_assert_eq!(&mono_mul(t, t, m), t);
        } else {
            prop_assert_eq!(mono_mul(t, t, m).len(), 2 * t.len());
        }
    }
    if m == SemiringMode::FullyIdempotent {
        prop_assert_eq!(&poly_add(a, a, m), a);
        prop_assert!(poly_contains(&poly_mul(a, a, m), a));
        if a.len() <= 1 {
            prop_assert_eq!(&poly_mul(a, a, m), a);
        }
    } else {
        prop_assert_eq!(poly_add(a, a, m).len(), 2 * a.len());
    }
    Ok(())
}

pub fn removal(f: &[&str], pick: &prop::sample::Index) -> Checked {
    let p = Monomial::from_factors(f.iter().copied(), SemiringMode::Free);
    if f.is_empty() {
        prop_assert!(mono_remove(&p, &ProvVariable::new("a")).is_err());
    } else {
        let v = ProvVariable::new(*pick.get(f));
        let rest = mono_remove(&p, &v).unwrap();
        prop_assert_eq!(mono_mul(&rest, &Monomial::var(v), SemiringMode::Free), p);
    }
    Ok(())
}

pub fn containment_order(x: &Polynomial, y: &Polynomial, z: &Polynomial) -> Checked {
    prop_assert!(poly_contains(x, x));
    prop_assert!(poly_contains(x, y));
    prop_assert!(poly_contains(y, z));
    prop_assert!(poly_contains(x, z));
    prop_assert!(poly_contains(x, &Polynomial::zero()));
    if poly_contains(y, x) {
        prop_assert_eq!(x, y);
    }
    Ok(())
}

pub fn containment_antisymmetry(a: &Polynomial, b: &Polynomial) -> Checked {
    if poly_contains(a, b) && poly_contains(b, a) {
        prop_assert_eq!(a, b);
    }
    Ok(())
}

pub fn rendering(m: SemiringMode, a: &Polynomial) -> Checked {
    prop_assert_eq!(&parse_polynomial(&a.to_string(), m).unwrap(), a);
    Ok(())
}
