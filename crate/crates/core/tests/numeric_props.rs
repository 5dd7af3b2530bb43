use std::f64::consts::PI;

use genlambda::cm::{e_series_tail_bound, e_value_direct, eval_series, moebius};
use genlambda::eisenstein::{e_series, index_transform, IndexPair};
use genlambda::lambda::BasisPair;
use genlambda::sl2::random_sl2;
use genlambda::{cm_certify, e_value, j_value, lambda_value, CMPoint, HPComplex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BITS: usize = 256;

fn pt(re: f64, im: f64) -> HPComplex {
    HPComplex::from_f64(re, im, BITS)
}

/// Distance between centers; radii are compared separately.
fn dist(a: &HPComplex, b: &HPComplex) -> f64 {
    a.sub(b).abs_center_f64()
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn scale(self, s: f64) -> C {
        C(self.0 * s, self.1 * s)
    }
    fn inv(self) -> C {
        let d = self.0 * self.0 + self.1 * self.1;
        C(self.0 / d, -self.1 / d)
    }
    fn sin(self) -> C {
        C(self.0.sin() * self.1.cosh(), self.0.cos() * self.1.sinh())
    }
    fn csc2(self) -> C {
        let s = self.sin();
        s.mul(s).inv()
    }
}

/// ℘(z; Z + Zτ) as a sum of csc² over horizontal rows of the lattice.
fn weierstrass_p(z: C, tau: C) -> C {
    let mut acc = C(-PI * PI / 3.0, 0.0);
    for n in -40i32..=40 {
        let shift = tau.scale(n as f64);
        acc = acc.add(z.add(shift).scale(PI).csc2().scale(PI * PI));
        if n != 0 {
            acc = acc.add(shift.scale(PI).csc2().scale(-PI * PI));
        }
    }
    acc
}

#[test]
fn e_value_matches_weierstrass_oracle() {
    for (n, r, s, tau) in [
        (3u32, 1i64, 0i64, C(0.0, 1.0)),
        (3, 1, 2, C(0.2, 1.1)),
        (5, 2, 1, C(-0.3, 0.9)),
        (4, 0, 1, C(0.45, 1.3)),
    ] {
        let z = tau.scale(r as f64 / n as f64).add(C(s as f64 / n as f64, 0.0));
        let wp = weierstrass_p(z, tau);
        // E = ℘/(2πi)² − 1/12
        let oracle = C(-wp.0 / (4.0 * PI * PI) - 1.0 / 12.0, -wp.1 / (4.0 * PI * PI));
        let v = e_value(&IndexPair::new(n, r, s).unwrap(), &pt(tau.0, tau.1), 30).unwrap();
        let err = ((v.re_f64() - oracle.0).powi(2) + (v.im_f64() - oracle.1).powi(2)).sqrt();
        assert!(err < 1e-9, "N={n} ({r},{s}) τ=({}, {}): {err}", tau.0, tau.1);
    }
}

#[test]
fn series_and_direct_sum_agree_on_a_grid() {
    for n in [2u32, 3, 5, 6] {
        let field_pairs = [(0i64, 1i64), (1, 0), (1, 1)];
        for (r, s) in field_pairs {
            let p = IndexPair::new(n, r, s).unwrap();
            let series = e_series(&p, 160).unwrap();
            for (x, y) in [(-0.5, 1.0), (0.0, 1.0), (0.3, 1.5), (0.5, 2.0)] {
                let tau = pt(x, y);
                let q = tau.div(&HPComplex::from_i64(n as i64, BITS)).unwrap().exp_2pi_i();
                let approx = eval_series(&series, &q).unwrap();
                let tail = e_series_tail_bound(160, q.abs_upper());
                let direct = e_value_direct(&p, &tau, 40).unwrap();
                let bound = approx.rad() + tail + direct.rad();
                assert!(dist(&approx, &direct) <= bound, "N={n} ({r},{s}) τ=({x},{y})");
                assert!(
                    bound < 1e-30,
                    "N={n} ({r},{s}) τ=({x},{y}): {} {tail:e} {}",
                    approx.rad(),
                    direct.rad()
                );
            }
        }
    }
}

fn twelfth() -> HPComplex {
    HPComplex::one(BITS).div(&HPComplex::from_i64(12, BITS)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `E + 1/12 = ℘/(2πi)²` has weight 2, and so does every difference of two E's.
    #[test]
    fn weight_two_law(n in 2u32..=8, r in 0i64..8, s in 0i64..8, seed in any::<u64>(), x in -0.5f64..0.5, y in 0.9f64..1.6) {
        prop_assume!(r % n as i64 != 0 || s % n as i64 != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sl2(&mut rng, 4);
        let p = IndexPair::new(n, r, s).unwrap();
        let tau = pt(x, y);
        let at = moebius(&a, &tau).unwrap();
        let lhs = e_value(&p, &at, 30).unwrap().add(&twelfth());
        let factor = tau.mul_i64(a.c).add(&HPComplex::from_i64(a.d, BITS)).sqr();
        let pa = index_transform(&p, &a).unwrap();
        let rhs = factor.mul(&e_value(&pa, &tau, 30).unwrap().add(&twelfth()));
        prop_assert!(dist(&lhs, &rhs) <= lhs.rad() + rhs.rad(), "A={:?} {:e}", a, dist(&lhs, &rhs));
        let p2 = IndexPair::new(n, r + 1, s).unwrap_or_else(|_| IndexPair::new(n, r, s + 1).unwrap());
        if !p2.is_pm(&p) {
            let d_lhs = e_value(&p, &at, 30).unwrap().sub(&e_value(&p2, &at, 30).unwrap());
            let pa2 = index_transform(&p2, &a).unwrap();
            let d_rhs = factor.mul(&e_value(&pa, &tau, 30).unwrap().sub(&e_value(&pa2, &tau, 30).unwrap()));
            prop_assert!(dist(&d_lhs, &d_rhs) <= d_lhs.rad() + d_rhs.rad());
        }
    }
}

#[test]
fn doubling_digits_is_consistent() {
    let taus = [pt(0.1, 1.2), pt(-0.4, 0.3), pt(0.25, 0.05)];
    let p = IndexPair::new(5, 1, 2).unwrap();
    let bp = BasisPair::new(5, (1, 0), (0, 2)).unwrap();
    for tau in &taus {
        let (a, b) = (e_value(&p, tau, 25).unwrap(), e_value(&p, tau, 50).unwrap());
        assert!(dist(&a, &b) <= a.rad() + b.rad());
        assert!(b.rad() <= a.rad());
        let (a, b) = (lambda_value(&bp, tau, 25).unwrap(), lambda_value(&bp, tau, 50).unwrap());
        assert!(dist(&a, &b) <= a.rad() + b.rad());
        let (a, b) = (j_value(tau, 25).unwrap(), j_value(tau, 50).unwrap());
        assert!(dist(&a, &b) <= a.rad() + b.rad());
    }
    for (n, k, d) in [(3u32, 1i64, -4i64), (4, 3, -8), (2, 1, -7)] {
        let point = CMPoint::from_discriminant(d).unwrap();
        let lo = cm_certify(n, k, &point, 40, None).unwrap();
        let hi = cm_certify(n, k, &point, 80, None).unwrap();
        assert_eq!(lo.verdict, hi.verdict, "N={n} k={k} D={d}");
        assert!(lo.verdict);
    }
}

#[test]
fn lambda_value_is_invariant_under_gamma() {
    let bp = BasisPair::new(3, (1, 0), (0, 1)).unwrap();
    let tau = pt(0.17, 0.93);
    let g = genlambda::SL2Mat { a: 1, b: 3, c: 0, d: 1 }.mul(&genlambda::SL2Mat { a: 1, b: 0, c: 3, d: 1 });
    let a = lambda_value(&bp, &tau, 30).unwrap();
    let b = lambda_value(&bp, &moebius(&g, &tau).unwrap(), 30).unwrap();
    assert!(dist(&a, &b) <= a.rad() + b.rad() + 1e-28);
}
