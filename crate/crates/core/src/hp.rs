//! Complex balls: a multiprecision center and an `f64` radius bounding the
//! distance to the true value.
//!
//! Every operation adds its own rounding error to the radius, using
//! `|x| < 2^exponent(x)` for the magnitude of each rounded intermediate.

use std::cell::RefCell;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision in bits for `digits` decimal digits plus guard bits,
/// rounded up to whole words.
pub fn bits_for_digits(digits: u32, guard: usize) -> usize {
    let b = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + guard;
    b.div_ceil(64) * 64
}

/// Nearest `f64` to `x` (saturating outside the `f64` range).
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _, s, e, _)) => {
            if x.is_zero() {
                return 0.0;
            }
            let top = *m.last().expect("nonempty mantissa") as f64 / 2f64.powi(64);
            let v = top * 2f64.powi(e.clamp(-1100, 1100));
            if s == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// Upper bound for `|x|`.
fn mag(x: &BigFloat) -> f64 {
    if x.is_zero() {
        0.0
    } else {
        2f64.powi(x.exponent().unwrap_or(i32::MAX).clamp(-1100, 1100))
    }
}

/// Lower bound for `|x|`.
fn mag_low(x: &BigFloat) -> f64 {
    if x.is_zero() {
        0.0
    } else {
        2f64.powi((x.exponent().unwrap_or(i32::MIN) - 1).clamp(-1100, 1100))
    }
}

/// `mag` tightened by the `f64` value when that is a normal number.
fn mag_tight(x: &BigFloat) -> f64 {
    let v = bf_to_f64(x).abs();
    if v > 1e-290 && v.is_finite() {
        mag(x).min(v * (1.0 + 1e-14))
    } else {
        mag(x)
    }
}

/// `mag_low` tightened the same way.
fn mag_low_tight(x: &BigFloat) -> f64 {
    let v = bf_to_f64(x).abs();
    if v > 1e-290 && v.is_finite() {
        mag_low(x).max(v * (1.0 - 1e-14))
    } else {
        mag_low(x)
    }
}

/// Slightly inflated sum, so that `f64` rounding of radii never understates them.
fn up(x: f64) -> f64 {
    x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

#[derive(Clone)]
pub struct HPComplex {
    re: BigFloat,
    im: BigFloat,
    rad: f64,
    prec: usize,
}

impl HPComplex {
    /// Rounding error of one operation whose result is `x`.
    fn ulp(&self, x: &BigFloat) -> f64 {
        mag(x) * 2f64.powi(1 - self.prec as i32)
    }

    fn from_parts(re: BigFloat, im: BigFloat, rad: f64, prec: usize) -> HPComplex {
        HPComplex { re, im, rad, prec }
    }

    pub fn zero(prec: usize) -> HPComplex {
        HPComplex::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> HPComplex {
        HPComplex::from_i64(1, prec)
    }

    pub fn i(prec: usize) -> HPComplex {
        HPComplex::from_parts(BigFloat::from_i64(0, prec), BigFloat::from_i64(1, prec), 0.0, prec)
    }

    pub fn from_i64(v: i64, prec: usize) -> HPComplex {
        HPComplex::from_parts(BigFloat::from_i64(v, prec), BigFloat::from_i64(0, prec), 0.0, prec)
    }

    /// Exact for every integer; rounded (and accounted for) beyond the precision.
    pub fn from_bigint(v: &BigInt, prec: usize) -> HPComplex {
        let re = with_consts(|cc| BigFloat::parse(&v.to_string(), Radix::Dec, prec, RM, cc));
        let mut z = HPComplex::from_parts(re, BigFloat::from_i64(0, prec), 0.0, prec);
        z.rad = z.ulp(&z.re);
        z
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> HPComplex {
        HPComplex::from_parts(BigFloat::from_f64(re, prec), BigFloat::from_f64(im, prec), 0.0, prec)
    }

    /// Parses decimal strings for the two parts; the rounding is added to the radius.
    pub fn parse(re: &str, im: &str, prec: usize) -> Result<HPComplex> {
        let p = |s: &str| -> Result<BigFloat> {
            let v = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, prec, RM, cc));
            if v.is_nan() || v.is_inf() {
                Err(Error::Parse(format!("not a decimal number: {s:?}")))
            } else {
                Ok(v)
            }
        };
        let mut z = HPComplex::from_parts(p(re)?, p(im)?, 0.0, prec);
        z.rad = z.ulp(&z.re) + z.ulp(&z.im);
        Ok(z)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn rad(&self) -> f64 {
        self.rad
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn re_f64(&self) -> f64 {
        bf_to_f64(&self.re)
    }

    pub fn im_f64(&self) -> f64 {
        bf_to_f64(&self.im)
    }

    /// Upper bound for the modulus of every point in the ball.
    pub fn abs_upper(&self) -> f64 {
        up(up(mag_tight(&self.re).hypot(mag_tight(&self.im))) + self.rad)
    }

    /// Lower bound for the modulus of every point in the ball.
    pub fn abs_lower(&self) -> f64 {
        let c = mag_low_tight(&self.re).hypot(mag_low_tight(&self.im)) * (1.0 - 4.0 * f64::EPSILON);
        (c - self.rad).max(0.0) * (1.0 - 4.0 * f64::EPSILON)
    }

    /// Upper bound for `|center|` that is also close to it.
    pub fn abs_center_f64(&self) -> f64 {
        self.re_f64().hypot(self.im_f64())
    }

    /// True when the whole ball lies within `tol` of zero.
    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.abs_center_f64() * (1.0 + 1e-12) + self.rad < tol
    }

    pub fn with_rad(mut self, extra: f64) -> HPComplex {
        self.rad = up(self.rad + extra);
        self
    }

    pub fn add(&self, o: &HPComplex) -> HPComplex {
        let p = self.prec;
        let re = self.re.add(&o.re, p, RM);
        let im = self.im.add(&o.im, p, RM);
        let rad = up(self.rad + o.rad + self.ulp(&re) + self.ulp(&im));
        HPComplex::from_parts(re, im, rad, p)
    }

    pub fn sub(&self, o: &HPComplex) -> HPComplex {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> HPComplex {
        HPComplex::from_parts(self.re.neg(), self.im.neg(), self.rad, self.prec)
    }

    pub fn conj(&self) -> HPComplex {
        HPComplex::from_parts(self.re.clone(), self.im.neg(), self.rad, self.prec)
    }

    pub fn mul(&self, o: &HPComplex) -> HPComplex {
        let p = self.prec;
        let ac = self.re.mul(&o.re, p, RM);
        let bd = self.im.mul(&o.im, p, RM);
        let ad = self.re.mul(&o.im, p, RM);
        let bc = self.im.mul(&o.re, p, RM);
        let re = ac.sub(&bd, p, RM);
        let im = ad.add(&bc, p, RM);
        let round = self.ulp(&ac) + self.ulp(&bd) + self.ulp(&ad) + self.ulp(&bc) + self.ulp(&re) + self.ulp(&im);
        let (m1, m2) = (mag(&self.re) + mag(&self.im), mag(&o.re) + mag(&o.im));
        let rad = up(m1 * o.rad + m2 * self.rad + self.rad * o.rad + round);
        HPComplex::from_parts(re, im, rad, p)
    }

    pub fn sqr(&self) -> HPComplex {
        self.mul(self)
    }

    pub fn mul_i64(&self, k: i64) -> HPComplex {
        self.mul(&HPComplex::from_i64(k, self.prec))
    }

    pub fn div(&self, o: &HPComplex) -> Result<HPComplex> {
        let low = o.abs_lower();
        if low <= 0.0 {
            return Err(Error::PrecisionInsufficient(
                "division by a ball containing zero".into(),
            ));
        }
        let p = self.prec;
        // exact centers first, then widen
        let den = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let c = HPComplex::from_parts(o.re.clone(), o.im.clone(), 0.0, p);
        let a = HPComplex::from_parts(self.re.clone(), self.im.clone(), 0.0, p);
        let num = a.mul(&c.conj());
        let re = num.re.div(&den, p, RM);
        let im = num.im.div(&den, p, RM);
        let lowc = low + o.rad;
        // relative error of den from its three roundings, and of the two divisions
        let rel = 8.0 * 2f64.powi(1 - p as i32);
        let w = mag(&re) + mag(&im);
        let center_err = num.rad / (lowc * lowc) + w * rel + 2f64.powi(1 - p as i32) * w;
        // |a'/b' − a/b| ≤ (|a' − a| + |a/b|·|b' − b|) / |b'|
        let ball_err = (self.rad + w * o.rad) / low;
        let rad = up(center_err + ball_err);
        Ok(HPComplex::from_parts(re, im, rad, p))
    }

    pub fn inv(&self) -> Result<HPComplex> {
        HPComplex::one(self.prec).div(self)
    }

    pub fn pow_u(&self, mut e: u64) -> HPComplex {
        let mut acc = HPComplex::one(self.prec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    pub fn pow_i(&self, e: i64) -> Result<HPComplex> {
        let p = self.pow_u(e.unsigned_abs());
        if e < 0 {
            p.inv()
        } else {
            Ok(p)
        }
    }

    /// `π` at precision `prec`.
    pub fn pi(prec: usize) -> HPComplex {
        let pi = with_consts(|cc| cc.pi(prec, RM));
        let mut z = HPComplex::from_parts(pi, BigFloat::from_i64(0, prec), 0.0, prec);
        z.rad = z.ulp(&z.re);
        z
    }

    /// `e^z`, with `|e^(z+δ) − e^z| ≤ |e^z|(e^|δ| − 1)` for the input radius.
    pub fn exp(&self) -> HPComplex {
        let p = self.prec;
        let (ex, c, s) = with_consts(|cc| (self.re.exp(p, RM, cc), self.im.cos(p, RM, cc), self.im.sin(p, RM, cc)));
        let re = ex.mul(&c, p, RM);
        let im = ex.mul(&s, p, RM);
        let m = mag(&ex);
        let round = 4.0 * m * 2f64.powi(2 - p as i32) + self.ulp(&re) + self.ulp(&im);
        let prop = m * 2.0 * (self.rad.exp_m1());
        HPComplex::from_parts(re, im, up(round + prop), p)
    }

    /// `e^(2πi·z)`.
    pub fn exp_2pi_i(&self) -> HPComplex {
        let two_pi_i = HPComplex::pi(self.prec).mul_i64(2).mul(&HPComplex::i(self.prec));
        two_pi_i.mul(self).exp()
    }

    /// Square root of a nonnegative real ball; the imaginary part must be zero.
    pub fn sqrt_real(&self) -> Result<HPComplex> {
        if !self.im.is_zero() || !self.re.is_positive() {
            return Err(Error::Precondition("square root of a non-positive real".into()));
        }
        let p = self.prec;
        let r = self.re.sqrt(p, RM);
        let low = (mag_low(&self.re) - self.rad).max(0.0);
        if low <= 0.0 {
            return Err(Error::PrecisionInsufficient("square root near zero".into()));
        }
        // |√(x+δ) − √x| ≤ |δ|/√(x − |δ|)
        let prop = self.rad / low.sqrt();
        let rad = up(prop + 2.0 * self.ulp(&r));
        Ok(HPComplex::from_parts(r, BigFloat::from_i64(0, p), rad, p))
    }

    /// The same ball at another working precision (radius kept, rounding added).
    pub fn with_prec(&self, prec: usize) -> HPComplex {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        let _ = re.set_precision(prec, RM);
        let _ = im.set_precision(prec, RM);
        let mut z = HPComplex::from_parts(re, im, self.rad, prec);
        if prec < self.prec {
            z.rad = up(z.rad + z.ulp(&z.re) + z.ulp(&z.im));
        }
        z
    }

    /// Decimal rendering of the center with `digits` significant digits.
    pub fn format_center(&self, digits: usize) -> (String, String) {
        (format_bf(&self.re, digits), format_bf(&self.im, digits))
    }
}

/// Decimal rendering with at most `digits` significant digits.
pub fn format_bf(x: &BigFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let s = with_consts(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
    let (mant, exp) = match s.split_once('e') {
        Some((m, e)) => (m.to_string(), e.to_string()),
        None => (s.clone(), "0".into()),
    };
    let neg = mant.starts_with('-');
    let body = mant.trim_start_matches('-');
    let mut kept = String::new();
    let mut count = 0;
    for ch in body.chars() {
        if ch.is_ascii_digit() {
            if count == digits {
                break;
            }
            count += 1;
        }
        kept.push(ch);
    }
    let kept = kept.trim_end_matches('.');
    format!("{}{}e{}", if neg { "-" } else { "" }, kept, exp.trim_start_matches('+'))
}

impl fmt::Debug for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.format_center(20);
        write!(f, "({re} + {im}i ± {:.3e})", self.rad)
    }
}

impl fmt::Display for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    #[test]
    fn pi_and_exp() {
        let pi = HPComplex::pi(P);
        assert!((pi.re_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert!(pi.rad() < 1e-70);
        // e^(iπ) = −1
        let z = pi.mul(&HPComplex::i(P)).exp();
        assert!(z.add(&HPComplex::one(P)).is_zero_within(1e-70));
    }

    #[test]
    fn division_round_trip() {
        let a = HPComplex::from_f64(1.5, -2.25, P);
        let b = HPComplex::from_f64(-0.125, 3.0, P);
        let q = a.div(&b).unwrap();
        assert!(q.mul(&b).sub(&a).is_zero_within(1e-70));
        assert!(HPComplex::zero(P).inv().is_err());
    }

    #[test]
    fn sqrt_and_parse() {
        let two = HPComplex::from_i64(2, P);
        let r = two.sqrt_real().unwrap();
        assert!(r.sqr().sub(&two).is_zero_within(1e-70));
        let x = HPComplex::parse("0.1", "-3", P).unwrap();
        assert!((x.re_f64() - 0.1).abs() < 1e-16 && x.im_f64() == -3.0);
        assert!(HPComplex::parse("abc", "0", P).is_err());
    }

    #[test]
    fn bigint_conversion() {
        let v: BigInt = "123456789012345678901234567890".parse().unwrap();
        let z = HPComplex::from_bigint(&v, P);
        assert!((z.re_f64() / 1.2345678901234568e29 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn formatting() {
        let z = HPComplex::from_f64(-1234.5, 0.0, P);
        assert_eq!(z.format_center(3).0, "-1.23e3");
        assert_eq!(bits_for_digits(50, 64), 256);
    }
}
