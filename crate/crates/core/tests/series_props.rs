use genlambda::arith::units_mod;
use genlambda::eisenstein::{e_series, e_series_uncached, IndexPair};
use genlambda::lambda::{
    decompose_basis, lambda_basis, lambda_composed, lambda_star_indexed, lambda_star_series, lemma41_pair, BasisPair,
};
use genlambda::sl2::{lift_sl2, random_sl2, SL2Mat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gamma_element(rng: &mut ChaCha8Rng, n: u32) -> SL2Mat {
    let m = random_sl2(rng, 4);
    let t = SL2Mat::translation(n as i64);
    let g = m.mul(&t).mul(&m.inverse());
    let m2 = random_sl2(rng, 4);
    let lower = SL2Mat {
        a: 1,
        b: 0,
        c: n as i64,
        d: 1,
    };
    g.mul(&m2.mul(&lower).mul(&m2.inverse()))
}

fn index_strategy() -> impl Strategy<Value = (u32, i64, i64)> {
    (2u32..=12)
        .prop_flat_map(|n| (Just(n), -40i64..40, -40i64..40))
        .prop_filter("nonzero pair", |(n, r, s)| {
            r.rem_euclid(*n as i64) != 0 || s.rem_euclid(*n as i64) != 0
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_and_even((n, r, s) in index_strategy(), a in -3i64..3, b in -3i64..3) {
        let nn = n as i64;
        let base = e_series_uncached(&IndexPair::new(n, r, s).unwrap(), 3 * nn).unwrap();
        let shifted = e_series_uncached(&IndexPair::new(n, r + a * nn, s + b * nn).unwrap(), 3 * nn).unwrap();
        let negated = e_series_uncached(&IndexPair::new(n, -r, -s).unwrap(), 3 * nn).unwrap();
        prop_assert_eq!(&base, &shifted);
        prop_assert_eq!(&base, &negated);
    }

    #[test]
    fn galois_moves_the_second_index((n, r, s) in index_strategy(), pick in 0usize..8) {
        let u = units_mod(n);
        let l = u[pick % u.len()] as i64;
        let p = IndexPair::new(n, r, s).unwrap();
        let lhs = e_series_uncached(&p, 40).unwrap().galois(l).unwrap();
        prop_assert_eq!(lhs, e_series_uncached(&IndexPair::new(n, r, s * l).unwrap(), 40).unwrap());
    }

    #[test]
    fn lambda_ignores_gamma_and_sign(n in 3u32..=9, pick in 0usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = units_mod(n);
        let k = u[pick % u.len()] as i64;
        let a = random_sl2(&mut rng, 8);
        let g = gamma_element(&mut rng, n);
        prop_assert!(g.in_gamma(n));
        let p = 3 * n as i64;
        let base = lambda_composed(n, k, &a, p).unwrap();
        prop_assert_eq!(&base, &lambda_composed(n, k, &a.mul(&g), p).unwrap());
        prop_assert_eq!(&base, &lambda_composed(n, k, &g.mul(&a).neg(), p).unwrap());
    }

    #[test]
    fn basis_decomposition_round_trips(n in 2u32..=12, q in (0i64..12, 0i64..12, 0i64..12, 0i64..12)) {
        let Ok(bp) = BasisPair::new(n, (q.0, q.1), (q.2, q.3)) else {
            return Ok(());
        };
        let (k, a) = decompose_basis(&bp).unwrap();
        let p = 2 * n as i64 + 6;
        prop_assert_eq!(lambda_basis(&bp, p).unwrap(), lambda_composed(n, k, &a, p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn twisting_by_galois(n in prop::sample::select(vec![3u32, 4, 5, 7, 8]), pick in 0usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = units_mod(n);
        let k = u[pick % u.len()] as i64;
        let a = random_sl2(&mut rng, 8);
        let (l, r) = lemma41_pair(n, k, &a, 40).unwrap();
        prop_assert_eq!(l, r);
    }
}

#[test]
fn distinct_lifts_agree() {
    for n in [3u32, 4, 5, 7] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..5 {
            let a = random_sl2(&mut rng, 6);
            let lift = lift_sl2(n, a.a, a.b, a.c, a.d).unwrap();
            assert!(lift.mul(&a.inverse()).in_gamma(n));
            let other = loop {
                let o = lift.mul(&gamma_element(&mut rng, n));
                if o != lift {
                    break o;
                }
            };
            assert_eq!(
                lambda_composed(n, 1, &lift, 24).unwrap(),
                lambda_composed(n, 1, &other, 24).unwrap()
            );
        }
    }
}

#[test]
fn every_basis_gives_a_nondegenerate_ratio() {
    for n in 2..=8u32 {
        let nn = n as i64;
        for r1 in 0..nn {
            for s1 in 0..nn {
                for r2 in 0..nn {
                    for s2 in 0..nn {
                        if let Ok(bp) = BasisPair::new(n, (r1, s1), (r2, s2)) {
                            lambda_basis(&bp, 4).unwrap();
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn star_ratio_galois_scales_indices() {
    let (n, k, l) = (7u32, 1i64, 2i64);
    let base = lambda_star_series(n, k, l, 40).unwrap();
    for m in units_mod(n) {
        let m = m as i64;
        assert_eq!(
            base.galois(m).unwrap(),
            lambda_star_indexed(n, k * m, l * m, 40).unwrap()
        );
    }
}

#[test]
fn concurrent_cache_is_a_memo_table() {
    let pairs: Vec<IndexPair> = (1..7).map(|s| IndexPair::new(7, 2, s).unwrap()).collect();
    let handles: Vec<_> = (0..4)
        .map(|t| {
            let pairs = pairs.clone();
            std::thread::spawn(move || {
                pairs
                    .iter()
                    .map(|p| e_series(p, 20 + 10 * t).unwrap().truncate(20))
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    for (i, p) in pairs.iter().enumerate() {
        let fresh = e_series_uncached(p, 20).unwrap();
        for r in &results {
            assert_eq!(r[i], fresh);
        }
    }
}
