use std::sync::Arc;

use genlambda::arith::{gcd, prime_power, units_mod};
use genlambda::lambda::c_constant;
use genlambda::{CycField, CycNum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

fn field(n: u32) -> Arc<CycField> {
    CycField::get(n).unwrap()
}

fn num(n: u32, parts: &[(i64, i64)]) -> CycNum {
    let f = field(n);
    let coeffs: Vec<BigRational> = parts
        .iter()
        .take(f.phi())
        .map(|&(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
        .collect();
    CycNum::from_coeffs(&f, &coeffs)
}

type Sample = (u32, Vec<(i64, i64)>, Vec<(i64, i64)>);

fn level_and_two() -> impl Strategy<Value = Sample> {
    (2u32..=12).prop_flat_map(|n| {
        let part = prop::collection::vec((-20i64..20, 1i64..6), 12);
        (Just(n), part.clone(), part)
    })
}

fn unit(n: u32, pick: usize) -> i64 {
    let u = units_mod(n);
    u[pick % u.len()] as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ring_axioms((n, a, b) in level_and_two(), c in prop::collection::vec((-9i64..9, 1i64..4), 12)) {
        let (a, b, c) = (num(n, &a), num(n, &b), num(n, &c));
        prop_assert_eq!(a.checked_add(&b).unwrap(), b.checked_add(&a).unwrap());
        prop_assert_eq!(a.checked_mul(&b).unwrap(), b.checked_mul(&a).unwrap());
        let ab_c = a.checked_mul(&b).unwrap().checked_mul(&c).unwrap();
        prop_assert_eq!(ab_c, a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap());
        let sum = a.checked_add(&b).unwrap().checked_add(&c).unwrap();
        prop_assert_eq!(sum, a.checked_add(&b.checked_add(&c).unwrap()).unwrap());
        if !a.is_zero() {
            prop_assert!(a.checked_mul(&a.inv().unwrap()).unwrap().is_one());
        }
    }

    #[test]
    fn galois_is_a_ring_homomorphism((n, a, b) in level_and_two(), i in 0usize..8, j in 0usize..8) {
        let (a, b) = (num(n, &a), num(n, &b));
        let (l, m) = (unit(n, i), unit(n, j));
        let g = |x: &CycNum| x.galois(l).unwrap();
        prop_assert_eq!(g(&a.checked_add(&b).unwrap()), g(&a).checked_add(&g(&b)).unwrap());
        prop_assert_eq!(g(&a.checked_mul(&b).unwrap()), g(&a).checked_mul(&g(&b)).unwrap());
        prop_assert_eq!(g(&a).galois(m).unwrap(), a.galois((l * m).rem_euclid(n as i64)).unwrap());
    }

    #[test]
    fn norm_is_multiplicative((n, a, b) in level_and_two()) {
        let (a, b) = (num(n, &a), num(n, &b));
        prop_assert_eq!(a.checked_mul(&b).unwrap().norm(), a.norm() * b.norm());
    }
}

#[test]
fn one_minus_zeta_is_a_unit_off_prime_powers() {
    for n in 2..=30u32 {
        for k in 1..n as i64 {
            let m = n as i64 / gcd(k, n as i64);
            if m > 1 && prime_power(m as u64).is_none() {
                let x = CycNum::one_minus_zeta(&field(n), k);
                assert!(x.is_integral(), "N={n} k={k}");
                assert_eq!(x.norm().abs(), BigRational::from_integer(1.into()), "N={n} k={k}");
                assert!(x.inv().unwrap().is_integral(), "N={n} k={k}");
            }
        }
    }
}

#[test]
fn normalizing_constant_absorbs_cubes() {
    for n in 3..=12u32 {
        let c = CycNum::from_int(&field(n), c_constant(n as i64).unwrap());
        for k in units_mod(n) {
            let cube = CycNum::one_minus_zeta(&field(n), k as i64).pow(3).unwrap();
            assert!(c.checked_div(&cube).unwrap().is_integral(), "N={n} k={k}");
        }
    }
}

#[test]
fn rational_norm_is_a_power() {
    let f = field(7);
    let x = CycNum::from_rational(&f, &BigRational::new(3.into(), 2.into()));
    assert_eq!(x.norm(), BigRational::new(729.into(), 64.into()));
}
