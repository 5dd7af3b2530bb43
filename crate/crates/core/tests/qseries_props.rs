use std::sync::Arc;

use genlambda::arith::units_mod;
use genlambda::eisenstein::{e_series_uncached, IndexPair};
use genlambda::lambda::lambda_k_series;
use genlambda::{CycField, CycNum, QSeries};
use proptest::prelude::*;

fn field(n: u32) -> Arc<CycField> {
    CycField::get(n).unwrap()
}

fn series(n: u32, order: i64, raw: &[Vec<i64>], precision: i64) -> QSeries {
    let f = field(n);
    let coeffs = raw
        .iter()
        .map(|c| CycNum::from_int_coeffs(&f, &c[..f.phi().min(c.len())]))
        .collect();
    QSeries::new(&f, order, coeffs, precision).unwrap()
}

fn coeff_rows(len: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..6, 12), len)
}

fn arb_series() -> impl Strategy<Value = (u32, QSeries, QSeries, QSeries)> {
    (
        2u32..=9,
        -2i64..3,
        -2i64..3,
        -2i64..3,
        4usize..14,
        4usize..14,
        4usize..14,
    )
        .prop_flat_map(|(n, o1, o2, o3, l1, l2, l3)| {
            (coeff_rows(l1), coeff_rows(l2), coeff_rows(l3)).prop_map(move |(a, b, c)| {
                (
                    n,
                    series(n, o1, &a, o1 + l1 as i64),
                    series(n, o2, &b, o2 + l2 as i64),
                    series(n, o3, &c, o3 + l3 as i64),
                )
            })
        })
}

/// Forces a unit leading coefficient so that division is defined.
fn with_unit_lead(g: &QSeries) -> QSeries {
    let f = g.field().clone();
    let mut coeffs = vec![CycNum::one(&f)];
    coeffs.extend(g.coeffs().iter().skip(1).cloned());
    QSeries::new(&f, g.order(), coeffs, g.precision().max(g.order() + 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_laws((_n, f, g, h) in arb_series()) {
        let fg = f.checked_mul(&g).unwrap();
        prop_assert_eq!(&fg, &g.checked_mul(&f).unwrap());
        let l = fg.checked_mul(&h).unwrap();
        let r = f.checked_mul(&g.checked_mul(&h).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn division_round_trips((_n, f, g, _h) in arb_series()) {
        let g = with_unit_lead(&g);
        let q = f.checked_div(&g).unwrap();
        let back = q.checked_mul(&g).unwrap();
        prop_assert!(back.precision() <= f.precision());
        prop_assert!(back.eq_mod(&f, back.precision()));
    }

    #[test]
    fn galois_commutes_with_arithmetic((n, f, g, _h) in arb_series(), pick in 0usize..8) {
        let u = units_mod(n);
        let l = u[pick % u.len()] as i64;
        let s = |x: &QSeries| x.galois(l).unwrap();
        prop_assert_eq!(s(&f.checked_add(&g).unwrap()), s(&f).checked_add(&s(&g)).unwrap());
        prop_assert_eq!(s(&f.checked_mul(&g).unwrap()), s(&f).checked_mul(&s(&g)).unwrap());
        let g = with_unit_lead(&g);
        prop_assert_eq!(s(&f.checked_div(&g).unwrap()), s(&f).checked_div(&s(&g)).unwrap());
    }

    #[test]
    fn galois_composes((n, f, _g, _h) in arb_series(), i in 0usize..8, j in 0usize..8) {
        let u = units_mod(n);
        let (l, m) = (u[i % u.len()] as i64, u[j % u.len()] as i64);
        prop_assert_eq!(f.galois(l).unwrap().galois(m).unwrap(), f.galois((l * m).rem_euclid(n as i64)).unwrap());
    }

    #[test]
    fn subtraction_remembers_precision((_n, f, _g, _h) in arb_series()) {
        let z = f.checked_sub(&f).unwrap();
        prop_assert!(z.is_zero());
        prop_assert_eq!(z.precision(), f.precision());
    }
}

#[test]
fn higher_precision_truncates_to_lower() {
    for n in [3u32, 5, 8] {
        for (r, s) in [(0, 1), (1, 0), (1, 2)] {
            let p = IndexPair::new(n, r, s).unwrap();
            let long = e_series_uncached(&p, 60).unwrap();
            assert_eq!(long.truncate(25), e_series_uncached(&p, 25).unwrap());
        }
        let long = lambda_k_series(n, 1, 60).unwrap();
        assert_eq!(long.truncate(30), lambda_k_series(n, 1, 30).unwrap());
    }
}
