//! Numerical values of E, Λ and j in the upper half plane with rigorous error
//! radii, and certification that `C_N·Λ(θ)` is a root of `Ψ_k` specialized
//! at `j(θ)`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::cyclotomic::CycNum;
use crate::eisenstein::{index_transform, IndexPair};
use crate::error::{Error, Result};
use crate::hp::{bits_for_digits, HPComplex};
use crate::lambda::{c_constant, BasisPair};
use crate::modpoly::{j_coefficients, psi_poly, PsiPoly};
use crate::qseries::QSeries;
use crate::sl2::SL2Mat;

/// Below this imaginary part, points are moved into the fundamental domain first.
pub const REDUCE_BELOW: f64 = 0.8;

/// Guard bits added to every working precision.
const GUARD: usize = 64;

fn tolerance(digits: u32) -> f64 {
    10f64.powi(-(digits as i32))
}

/// `(aτ + b)/(cτ + d)`.
pub fn moebius(m: &SL2Mat, tau: &HPComplex) -> Result<HPComplex> {
    let p = tau.prec();
    let num = tau.mul_i64(m.a).add(&HPComplex::from_i64(m.b, p));
    let den = tau.mul_i64(m.c).add(&HPComplex::from_i64(m.d, p));
    num.div(&den)
}

fn check_upper(tau: &HPComplex) -> Result<()> {
    if tau.im_f64() <= 0.0 || tau.im_f64() <= tau.rad() {
        return Err(Error::Precondition(format!("{tau} is not in the upper half plane")));
    }
    Ok(())
}

/// `(τ′, A)` with `τ′ = Aτ`, `|Re τ′| ≤ 1/2` and `|τ′| ≥ 1` (up to rounding).
pub fn fundamental_reduce(tau: &HPComplex) -> Result<(HPComplex, SL2Mat)> {
    check_upper(tau)?;
    let mut m = SL2Mat::IDENTITY;
    let mut cur = tau.clone();
    for _ in 0..10_000 {
        let n = cur.re_f64().round() as i64;
        if n != 0 {
            m = SL2Mat::translation(-n).mul(&m);
            cur = cur.sub(&HPComplex::from_i64(n, cur.prec()));
        }
        let (x, y) = (cur.re_f64(), cur.im_f64());
        if x * x + y * y < 1.0 - 1e-12 {
            m = SL2Mat::S.mul(&m);
            cur = cur.inv()?.neg();
        } else {
            return Ok((moebius(&m, tau)?, m));
        }
    }
    Err(Error::Invariant(
        "fundamental-domain reduction did not terminate".into(),
    ))
}

/// `ζ_N^m` as a ball.
fn zeta_pow(n: u32, m: i64, prec: usize) -> Result<HPComplex> {
    let m = m.rem_euclid(n as i64);
    HPComplex::from_i64(m, prec)
        .div(&HPComplex::from_i64(n as i64, prec))
        .map(|x| x.exp_2pi_i())
}

/// `x/(1 − x)²`.
fn lambert(x: &HPComplex) -> Result<HPComplex> {
    let one = HPComplex::one(x.prec());
    x.div(&one.sub(x).sqr())
}

/// Σ_{m ≥ start} |L(x·Q^m)| for |x·Q^start| = ρ < 1.
fn lambert_tail(rho: f64, qa: f64) -> f64 {
    rho / ((1.0 - rho).powi(2) * (1.0 - qa))
}

/// `E(τ; p)` summed in Lambert form without any reduction of `τ`.
///
/// ```text
/// E = Σ_{m≥0} L(uQ^m) + Σ_{m≥1} [L(u⁻¹Q^m) − 2L(Q^m)],  L(x) = x/(1−x)²,
/// u = ω q^{r}, Q = q^N.
/// ```
pub fn e_value_direct(p: &IndexPair, tau: &HPComplex, digits: u32) -> Result<HPComplex> {
    check_upper(tau)?;
    let prec = tau.prec();
    let n = p.level();
    let red = p.reduced();
    let q = tau.div(&HPComplex::from_i64(n as i64, prec))?.exp_2pi_i();
    let big_q = tau.exp_2pi_i();
    let omega = zeta_pow(n, red.omega_exponent as i64, prec)?;
    let u = omega.mul(&q.pow_u(red.brace as u64));
    let u_inv = u.inv()?;
    let qa = big_q.abs_upper();
    if qa >= 0.5 {
        return Err(Error::PrecisionInsufficient(format!(
            "|q^N| = {qa:.3} too large; reduce τ first"
        )));
    }
    let (ua, uia) = (u.abs_upper(), u_inv.abs_upper());
    let tol = tolerance(digits) / 4.0;
    let mut terms = 1usize;
    let tail = loop {
        let qm = qa.powi(terms as i32);
        let (r1, r2) = (ua * qm, uia * qm);
        if r1 < 0.9 && r2 < 0.9 {
            let t = lambert_tail(r1, qa) + lambert_tail(r2, qa) + 2.0 * lambert_tail(qm, qa);
            if t < tol {
                break t;
            }
        }
        terms += 1;
        if terms > 100_000 {
            return Err(Error::PrecisionInsufficient("E-value tail does not converge".into()));
        }
    };
    let mut sum = lambert(&u)?;
    let (mut xu, mut xui, mut xq) = (u.clone(), u_inv.clone(), HPComplex::one(prec));
    for _ in 1..terms {
        xu = xu.mul(&big_q);
        xui = xui.mul(&big_q);
        xq = xq.mul(&big_q);
        sum = sum
            .add(&lambert(&xu)?)
            .add(&lambert(&xui)?)
            .sub(&lambert(&xq)?.mul_i64(2));
    }
    Ok(sum.with_rad(tail))
}

fn working(tau: &HPComplex, digits: u32) -> HPComplex {
    tau.with_prec(bits_for_digits(digits, GUARD))
}

/// `E(τ; p)`; for `Im τ < 0.8` moves `τ = Bτ′` into the fundamental domain.
///
/// Only `E + 1/12 = ℘/(2πi)²` has weight 2:
/// `E(Bτ′; p) + 1/12 = (cτ′ + d)²·(E(τ′; pB) + 1/12)`.
pub fn e_value(p: &IndexPair, tau: &HPComplex, digits: u32) -> Result<HPComplex> {
    let tau = working(tau, digits);
    check_upper(&tau)?;
    if tau.im_f64() >= REDUCE_BELOW {
        return e_value_direct(p, &tau, digits);
    }
    let (tp, a) = fundamental_reduce(&tau)?;
    let b = a.inverse();
    let prec = tau.prec();
    let factor = tp.mul_i64(b.c).add(&HPComplex::from_i64(b.d, prec)).sqr();
    let twelfth = HPComplex::one(prec).div(&HPComplex::from_i64(12, prec))?;
    let wp = e_value_direct(&index_transform(p, &b)?, &tp, digits)?.add(&twelfth);
    Ok(factor.mul(&wp).sub(&twelfth))
}

/// `Λ(θ; Q₁, Q₂)`; the weight factors of a reduction cancel, so only the indices move.
pub fn lambda_value(bp: &BasisPair, theta: &HPComplex, digits: u32) -> Result<HPComplex> {
    let tau = working(theta, digits);
    check_upper(&tau)?;
    let (tp, b) = if tau.im_f64() >= REDUCE_BELOW {
        (tau, SL2Mat::IDENTITY)
    } else {
        let (tp, a) = fundamental_reduce(&tau)?;
        (tp, a.inverse())
    };
    let (q1, q2, q3) = (
        index_transform(&bp.q1, &b)?,
        index_transform(&bp.q2, &b)?,
        index_transform(&bp.sum(), &b)?,
    );
    let e3 = e_value_direct(&q3, &tp, digits)?;
    let num = e_value_direct(&q1, &tp, digits)?.sub(&e3);
    let den = e_value_direct(&q2, &tp, digits)?.sub(&e3);
    num.div(&den)
}

/// Σ_{n > m} e^(4π√n)·qaⁿ, an upper bound for the tail of the j-series.
fn j_tail(m: usize, qa: f64) -> Option<f64> {
    let n = (m + 1) as f64;
    let ratio = (2.0 * std::f64::consts::PI / n.sqrt()).exp() * qa;
    if ratio >= 1.0 {
        return None;
    }
    Some((4.0 * std::f64::consts::PI * n.sqrt() + n * qa.ln()).exp() / (1.0 - ratio))
}

/// `j(τ)` from its q̃-expansion after moving `τ` into the fundamental domain.
pub fn j_value(tau: &HPComplex, digits: u32) -> Result<HPComplex> {
    let tau = working(tau, digits);
    let (tp, _) = fundamental_reduce(&tau)?;
    let qt = tp.exp_2pi_i();
    let qa = qt.abs_upper();
    let tol = tolerance(digits) / 4.0;
    let mut m = 4usize;
    let tail = loop {
        if let Some(t) = j_tail(m, qa) {
            if t < tol {
                break t;
            }
        }
        m += 1;
        if m > 100_000 {
            return Err(Error::PrecisionInsufficient("j-series tail does not converge".into()));
        }
    };
    let coeffs = j_coefficients(m as i64 + 1);
    let prec = tp.prec();
    let mut pw = qt.inv()?;
    let mut sum = HPComplex::zero(prec);
    for c in &coeffs {
        sum = sum.add(&HPComplex::from_bigint(c, prec).mul(&pw));
        pw = pw.mul(&qt);
    }
    Ok(sum.with_rad(tail))
}

/// Powers `ζ_N^i`, `i < φ(N)`, used to evaluate cyclotomic numbers.
pub fn zeta_powers(n: u32, count: usize, prec: usize) -> Result<Vec<HPComplex>> {
    (0..count).map(|i| zeta_pow(n, i as i64, prec)).collect()
}

/// Complex value of a cyclotomic number under `ζ ↦ e^(2πi/N)`.
pub fn cyc_value(c: &CycNum, zetas: &[HPComplex]) -> Result<HPComplex> {
    let prec = zetas[0].prec();
    let mut acc = HPComplex::zero(prec);
    for (num, z) in c.numerators().iter().zip(zetas) {
        if num.sign() != num_bigint::Sign::NoSign {
            acc = acc.add(&HPComplex::from_bigint(num, prec).mul(z));
        }
    }
    if c.denominator() != &BigInt::from(1) {
        acc = acc.div(&HPComplex::from_bigint(c.denominator(), prec))?;
    }
    Ok(acc)
}

/// `Σ c_e q^e` over the known coefficients of `s` (no truncation tail).
pub fn eval_series(s: &QSeries, q: &HPComplex) -> Result<HPComplex> {
    let prec = q.prec();
    let zetas = zeta_powers(s.level(), s.field().phi(), prec)?;
    let mut acc = HPComplex::zero(prec);
    let mut pw = q.pow_i(s.order())?;
    for c in s.coeffs() {
        if !c.is_zero() {
            acc = acc.add(&cyc_value(c, &zetas)?.mul(&pw));
        }
        pw = pw.mul(q);
    }
    Ok(acc)
}

/// Bound for `Σ_{e ≥ P} |c_e||q|^e` when `|c_e| ≤ 5e²`, as for every E-series.
pub fn e_series_tail_bound(precision: i64, qa: f64) -> f64 {
    let (p, r) = (precision as f64, qa);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    // Σ_{e≥P} e²rᵉ
    let s = r.powf(p) * (p * p / (1.0 - r) + 2.0 * p * r / (1.0 - r).powi(2) + r * (1.0 + r) / (1.0 - r).powi(3));
    5.0 * s
}

/// `Ψ(x)` with `j` specialized to a numeric value.
pub fn psi_eval(psi: &PsiPoly, x: &HPComplex, j: &HPComplex) -> Result<HPComplex> {
    let prec = x.prec();
    let zetas = zeta_powers(psi.level, psi.field().phi(), prec)?;
    let mut acc = HPComplex::zero(prec);
    for row in psi.table.iter().rev() {
        let mut c = HPComplex::zero(prec);
        for v in row.iter().rev() {
            c = c.mul(j).add(&cyc_value(v, &zetas)?);
        }
        acc = acc.mul(x).add(&c);
    }
    Ok(acc)
}

/// A point of the upper half plane, optionally tagged with a discriminant.
#[derive(Debug, Clone)]
pub struct CMPoint {
    pub theta: HPComplex,
    pub label: String,
    pub discriminant: Option<i64>,
}

/// Working precision used to hold CM points before evaluation.
pub const POINT_BITS: usize = 1024;

fn is_fundamental(d: i64) -> bool {
    let squarefree = |m: i64| (2..).take_while(|p| p * p <= m).all(|p| m % (p * p) != 0);
    match d.rem_euclid(4) {
        1 => squarefree(-d),
        0 => {
            let m = (-d) / 4;
            (m % 4 == 1 || m % 4 == 2) && squarefree(m)
        }
        _ => false,
    }
}

impl CMPoint {
    pub fn new(theta: HPComplex, label: impl Into<String>) -> Result<CMPoint> {
        check_upper(&theta)?;
        Ok(CMPoint {
            theta,
            label: label.into(),
            discriminant: None,
        })
    }

    /// Parses `a+bi`, `a-bi`, `bi` or `i`.
    pub fn parse(s: &str) -> Result<CMPoint> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = t
            .strip_suffix('i')
            .ok_or_else(|| Error::Parse(format!("expected a+bi, got {s:?}")))?;
        let split = body
            .char_indices()
            .filter(|&(i, c)| (c == '+' || c == '-') && i > 0 && !body[..i].ends_with(['e', 'E']))
            .map(|(i, _)| i)
            .next_back();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let theta = HPComplex::parse(re, im, POINT_BITS)?;
        CMPoint::new(theta, t)
    }

    /// `√(D/4)` for `D ≡ 0 (mod 4)`, `(1 + √D)/2` for `D ≡ 1 (mod 4)`.
    pub fn from_discriminant(d: i64) -> Result<CMPoint> {
        if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(Error::Precondition(format!("{d} is not a negative discriminant")));
        }
        let p = POINT_BITS;
        let theta = if d.rem_euclid(4) == 0 {
            let im = HPComplex::from_i64(-d / 4, p).sqrt_real()?;
            HPComplex::i(p).mul(&im)
        } else {
            let im = HPComplex::from_i64(-d, p).sqrt_real()?;
            HPComplex::one(p)
                .add(&HPComplex::i(p).mul(&im))
                .div(&HPComplex::from_i64(2, p))?
        };
        let mut pt = CMPoint::new(theta, format!("D={d}"))?;
        pt.discriminant = Some(d);
        Ok(pt)
    }

    /// Whether the discriminant is fundamental, i.e. the point generates a maximal order.
    pub fn maximal_order(&self) -> Option<bool> {
        self.discriminant.map(is_fundamental)
    }
}

/// Verdict and error budget of one CM certification.
#[derive(Debug, Clone, Serialize)]
pub struct CmCertificate {
    pub level: u32,
    pub k: i64,
    pub theta: [String; 2],
    pub discriminant: Option<i64>,
    pub maximal_order: Option<bool>,
    pub digits: u32,
    pub working_bits: usize,
    pub x: [String; 2],
    pub x_err: f64,
    pub j_theta: [String; 2],
    pub j_err: f64,
    pub residual: f64,
    pub err: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub note: String,
}

fn show(z: &HPComplex, digits: u32) -> [String; 2] {
    let (re, im) = z.format_center(digits as usize);
    [re, im]
}

/// `max_{i,d} |c_{i,d}|·|x|^i·|j|^d` in `f64`, for choosing guard bits.
fn largest_term(psi: &PsiPoly, x: f64, j: f64) -> f64 {
    let mut best: f64 = 1.0;
    for (i, row) in psi.table.iter().enumerate() {
        for (d, c) in row.iter().enumerate() {
            let size: f64 = c
                .coeffs()
                .iter()
                .map(|r| {
                    let v: f64 = num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::MAX);
                    v.abs()
                })
                .sum();
            if size > 0.0 {
                let t = size.log2() + i as f64 * x.max(1e-300).log2() + d as f64 * j.max(1e-300).log2();
                best = best.max(t);
            }
        }
    }
    best
}

/// Certifies `|Ψ_k(C_N·Λ_k(θ))|` at `j = j(θ)` is below `10^(−digits/2)`.
pub fn cm_certify(n: u32, k: i64, point: &CMPoint, digits: u32, psi: Option<&PsiPoly>) -> Result<CmCertificate> {
    let owned;
    let psi = match psi {
        Some(p) => {
            if p.level != n || p.k != k {
                return Err(Error::Precondition(format!(
                    "Ψ table is for level {} and k = {}, not {n} and {k}",
                    p.level, p.k
                )));
            }
            p
        }
        None => {
            owned = psi_poly(n, k, None)?;
            &owned
        }
    };
    let bp = BasisPair::new(n, (1, 0), (0, k))?;
    let cn = c_constant(n as i64)?;
    let rough_x = lambda_value(&bp, &point.theta, 20)?.abs_center_f64() * cn as f64;
    let rough_j = j_value(&point.theta, 20)?.abs_center_f64();
    let guard_bits = largest_term(psi, rough_x, rough_j).max(0.0).ceil() as u32;
    let guard_digits = (guard_bits as f64 / std::f64::consts::LOG2_10).ceil() as u32 + 5;
    let work = digits + guard_digits;
    let x = lambda_value(&bp, &point.theta, work)?.mul_i64(cn);
    let j = j_value(&point.theta, work)?;
    let res = psi_eval(psi, &x, &j)?;
    let tol = 10f64.powf(-(digits as f64) / 2.0);
    let residual = res.abs_center_f64();
    let verdict = residual * (1.0 + 1e-12) + res.rad() < tol;
    let note = match point.maximal_order() {
        Some(true) => "maximal order: value expected to generate the ray class field of conductor N over K(j(θ)) for N ≠ 6 (not certified)".to_string(),
        Some(false) => "non-maximal order: only the algebraic-integer statement is certified".to_string(),
        None => "explicit point: only the algebraic-integer statement is certified".to_string(),
    };
    Ok(CmCertificate {
        level: n,
        k,
        theta: show(&point.theta, 30),
        discriminant: point.discriminant,
        maximal_order: point.maximal_order(),
        digits,
        working_bits: x.prec(),
        x: show(&x, digits),
        x_err: x.rad(),
        j_theta: show(&j, digits),
        j_err: j.rad(),
        residual,
        err: res.rad(),
        tolerance: tol,
        verdict,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> HPComplex {
        HPComplex::from_f64(re, im, 256)
    }

    #[test]
    fn reduction_examples() {
        let (t, m) = fundamental_reduce(&pt(0.0, 1.0)).unwrap();
        assert_eq!(m, SL2Mat::IDENTITY);
        assert!((t.im_f64() - 1.0).abs() < 1e-30);
        let (t, m) = fundamental_reduce(&pt(5.0, 1.0)).unwrap();
        assert_eq!(m, SL2Mat::translation(-5));
        assert!(t.re_f64().abs() < 1e-30);
        let tau = pt(-0.5, 0.5);
        let (t, m) = fundamental_reduce(&tau).unwrap();
        assert!(t.re_f64().abs() <= 0.5 + 1e-12);
        assert!(t.abs_center_f64() >= 1.0 - 1e-12);
        assert!(moebius(&m, &tau).unwrap().sub(&t).is_zero_within(1e-60));
        assert!(fundamental_reduce(&pt(0.0, -1.0)).is_err());
    }

    #[test]
    fn level_two_constant_value() {
        let p = IndexPair::new(2, 0, 1).unwrap();
        let v = e_value(&p, &pt(0.0, 10.0), 50).unwrap();
        let want = -0.25 - 4.0 * (-20.0 * std::f64::consts::PI).exp();
        assert!((v.re_f64() - want).abs() < 1e-20);
        assert!(v.rad() < 1e-50);
    }

    #[test]
    fn classical_j_values() {
        let j = j_value(&pt(0.0, 1.0), 40).unwrap();
        assert!(j.sub(&HPComplex::from_i64(1728, j.prec())).is_zero_within(1e-35));
        let rho = CMPoint::from_discriminant(-3).unwrap();
        assert!(j_value(&rho.theta, 40).unwrap().is_zero_within(1e-35));
        let r2 = CMPoint::from_discriminant(-8).unwrap();
        let j = j_value(&r2.theta, 40).unwrap();
        assert!(j.sub(&HPComplex::from_i64(8000, j.prec())).is_zero_within(1e-32));
    }

    #[test]
    fn parse_points() {
        let p = CMPoint::parse("0.5+0.75i").unwrap();
        assert_eq!((p.theta.re_f64(), p.theta.im_f64()), (0.5, 0.75));
        let p = CMPoint::parse("i").unwrap();
        assert_eq!((p.theta.re_f64(), p.theta.im_f64()), (0.0, 1.0));
        let p = CMPoint::parse("-1e-1-2i");
        assert!(p.is_err());
        assert!(CMPoint::parse("1").is_err());
        assert_eq!(CMPoint::from_discriminant(-4).unwrap().maximal_order(), Some(true));
        assert_eq!(CMPoint::from_discriminant(-16).unwrap().maximal_order(), Some(false));
    }

    #[test]
    fn level_two_certificate() {
        let c = cm_certify(2, 1, &CMPoint::parse("i").unwrap(), 40, None).unwrap();
        assert!(c.verdict, "{c:?}");
        assert!(
            c.x[0].starts_with("-1.5999999") || c.x[0].starts_with("-1.6e1"),
            "{:?}",
            c.x
        );
    }
}
