//! Exact arithmetic in the cyclotomic field Q(ζ_N).
//!
//! Elements live in the power basis 1, ζ, …, ζ^(φ(N)−1) modulo the N-th
//! cyclotomic polynomial Φ_N. Internally a [`CycNum`] is an integer numerator
//! vector over one positive common denominator, kept in lowest terms, so the
//! representation is canonical and equality is structural.
//!
//! Z[ζ_N] is the full ring of integers of Q(ζ_N) and has the power basis as a
//! Z-basis. An element is therefore an algebraic integer exactly when all of
//! its power-basis coefficients are integers, which here means the common
//! denominator is 1.
//!
//! Field norms are resultants `Res(Φ_N, a)`. Since Φ_N is monic this equals
//! `∏ a(α)` over the primitive N-th roots of unity α, so the norm of a rational
//! `c` is `c^φ(N)` with no extra sign.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{check_coprime, check_level, divisors, euler_phi, gcd, modn};
use crate::error::{Error, Result};

/// An integer polynomial, coefficients from the constant term upwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycPolynomial {
    coeffs: Vec<BigInt>,
}

impl CycPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        CycPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn mul(&self, other: &CycPolynomial) -> CycPolynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return CycPolynomial::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CycPolynomial::new(out)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &CycPolynomial) -> (CycPolynomial, CycPolynomial) {
        let d = divisor.degree().expect("division by the zero polynomial");
        assert!(divisor.leading().is_some_and(One::is_one), "divisor must be monic");
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (CycPolynomial::new(Vec::new()), CycPolynomial::new(rem));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for top in (d..rem.len()).rev() {
            let c = std::mem::take(&mut rem[top]);
            if c.is_zero() {
                continue;
            }
            for (j, m) in divisor.coeffs[..d].iter().enumerate() {
                rem[top - d + j] -= &c * m;
            }
            quot[top - d] = c;
        }
        rem.truncate(d);
        (CycPolynomial::new(quot), CycPolynomial::new(rem))
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }
}

impl fmt::Display for CycPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}*x^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The N-th cyclotomic polynomial, by exact division of `x^N − 1` by `Φ_d` for
/// every proper divisor `d` of `N`.
pub fn cyclotomic_poly(n: i64) -> Result<CycPolynomial> {
    let n = check_level(n)?;
    Ok(cyclotomic_poly_any(n))
}

fn cyclotomic_poly_any(n: u32) -> CycPolynomial {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    let mut p = CycPolynomial::new(num);
    for d in divisors(n).into_iter().filter(|&d| d < n) {
        let (q, r) = p.div_rem_monic(&cyclotomic_poly_any(d));
        debug_assert!(r.coeffs.is_empty());
        p = q;
    }
    p
}

/// Per-level data: Φ_N and the reductions of `x^m` for `0 <= m < 2N`.
#[derive(Debug)]
pub struct CycField {
    level: u32,
    phi: usize,
    modulus: CycPolynomial,
    powers: Vec<Vec<i64>>,
}

impl CycField {
    /// Shared field context for level `n`.
    pub fn get(n: u32) -> Result<Arc<CycField>> {
        check_level(n as i64)?;
        static REGISTRY: OnceLock<Mutex<HashMap<u32, Arc<CycField>>>> = OnceLock::new();
        let mut map = REGISTRY.get_or_init(Default::default).lock().unwrap();
        Ok(map.entry(n).or_insert_with(|| Arc::new(CycField::build(n))).clone())
    }

    fn build(n: u32) -> CycField {
        let modulus = cyclotomic_poly_any(n);
        let phi = euler_phi(n);
        assert_eq!(modulus.degree(), Some(phi));
        let mut powers = Vec::with_capacity(2 * n as usize);
        let mut cur = vec![BigInt::zero(); phi];
        cur[0] = BigInt::one();
        for _ in 0..2 * n {
            powers.push(
                cur.iter()
                    .map(|c| c.to_i64().expect("x^m mod Phi_N has small coefficients"))
                    .collect(),
            );
            // multiply by x and fold the top coefficient back
            let top = cur.pop().unwrap();
            cur.insert(0, BigInt::zero());
            for (c, m) in cur.iter_mut().zip(&modulus.coeffs) {
                *c -= &top * m;
            }
        }
        CycField {
            level: n,
            phi,
            modulus,
            powers,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// φ(N), the dimension of the power basis.
    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn modulus(&self) -> &CycPolynomial {
        &self.modulus
    }

    /// Power-basis coordinates of ζ^m.
    pub fn zeta_power(&self, m: i64) -> &[i64] {
        &self.powers[modn(m, self.level) as usize]
    }

    /// Reduces a raw polynomial of length at most `2N` modulo Φ_N.
    pub(crate) fn reduce(&self, raw: &[BigInt]) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = raw.iter().take(self.phi).cloned().collect();
        out.resize(self.phi, BigInt::zero());
        for (m, c) in raw.iter().enumerate().skip(self.phi) {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&self.powers[m]) {
                if p != 0 {
                    *o += c * p;
                }
            }
        }
        out
    }

    /// Checked `i128` variant of [`CycField::reduce`].
    pub(crate) fn reduce_i128(&self, raw: &[i128]) -> Option<Vec<i128>> {
        let mut out: Vec<i128> = raw.iter().take(self.phi).copied().collect();
        out.resize(self.phi, 0);
        for (m, &c) in raw.iter().enumerate().skip(self.phi) {
            if c == 0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&self.powers[m]) {
                if p != 0 {
                    *o = o.checked_add(c.checked_mul(p as i128)?)?;
                }
            }
        }
        Some(out)
    }

    /// Maps a group-ring vector `Σ c_m ζ^m` (length N) to the power basis.
    pub(crate) fn fold_zeta_sum(&self, sum: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.phi];
        for (m, c) in sum.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&self.powers[m]) {
                if p != 0 {
                    *o += c * p;
                }
            }
        }
        out
    }
}

/// An element of Q(ζ_N).
#[derive(Clone)]
pub struct CycNum {
    field: Arc<CycField>,
    num: Vec<BigInt>,
    den: BigInt,
}

/// Selector for [`cyc_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycOp {
    Add,
    Sub,
    Mul,
}

impl CycNum {
    pub fn zero(field: &Arc<CycField>) -> CycNum {
        CycNum {
            field: field.clone(),
            num: vec![BigInt::zero(); field.phi],
            den: BigInt::one(),
        }
    }

    pub fn one(field: &Arc<CycField>) -> CycNum {
        CycNum::from_int(field, 1)
    }

    pub fn from_int(field: &Arc<CycField>, v: i64) -> CycNum {
        CycNum::from_bigint(field, BigInt::from(v))
    }

    pub fn from_bigint(field: &Arc<CycField>, v: BigInt) -> CycNum {
        let mut x = CycNum::zero(field);
        x.num[0] = v;
        x
    }

    pub fn from_rational(field: &Arc<CycField>, v: &BigRational) -> CycNum {
        let mut x = CycNum::zero(field);
        x.num[0] = v.numer().clone();
        x.den = v.denom().clone();
        x.normalize();
        x
    }

    /// ζ^m for any integer `m`.
    pub fn zeta_pow(field: &Arc<CycField>, m: i64) -> CycNum {
        CycNum {
            field: field.clone(),
            num: field.zeta_power(m).iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// `1 − ζ^m`.
    pub fn one_minus_zeta(field: &Arc<CycField>, m: i64) -> CycNum {
        &CycNum::one(field) - &CycNum::zeta_pow(field, m)
    }

    /// Builds `Σ coeffs[i]·ζ^i`; any length up to 2N is accepted and reduced.
    pub fn from_coeffs(field: &Arc<CycField>, coeffs: &[BigRational]) -> CycNum {
        assert!(coeffs.len() <= 2 * field.level as usize, "too many coefficients");
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let raw: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        CycNum::from_parts(field, field.reduce(&raw), den)
    }

    /// Integer coordinates in the power basis (reduced if longer than φ(N)).
    pub fn from_int_coeffs(field: &Arc<CycField>, coeffs: &[i64]) -> CycNum {
        let raw: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        CycNum::from_parts(field, field.reduce(&raw), BigInt::one())
    }

    /// From a reduced numerator vector and a nonzero denominator.
    pub(crate) fn from_parts(field: &Arc<CycField>, num: Vec<BigInt>, den: BigInt) -> CycNum {
        debug_assert_eq!(num.len(), field.phi);
        assert!(!den.is_zero(), "zero denominator");
        let mut x = CycNum {
            field: field.clone(),
            num,
            den,
        };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in &mut self.num {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                return;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.num {
                *c /= &g;
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.field.level
    }

    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    /// Power-basis coefficients as reduced rationals.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// True iff the element lies in Z[ζ_N].
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// `Some(c)` when the element is the rational number `c`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.num[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| BigRational::new(self.num[0].clone(), self.den.clone()))
    }

    fn check_level(&self, other: &CycNum) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field.level == other.field.level {
            Ok(())
        } else {
            Err(Error::LevelMismatch(self.field.level, other.field.level))
        }
    }

    pub fn checked_add(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(self.add_sub(other, false))
    }

    pub fn checked_sub(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(self.add_sub(other, true))
    }

    pub fn checked_mul(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(self.mul_impl(other))
    }

    pub fn checked_div(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(self.mul_impl(&other.inv()?))
    }

    fn add_sub(&self, other: &CycNum, sub: bool) -> CycNum {
        let combine = |a: &BigInt, b: &BigInt| if sub { a - b } else { a + b };
        if self.den == other.den {
            let num = self.num.iter().zip(&other.num).map(|(a, b)| combine(a, b)).collect();
            return CycNum::from_parts(&self.field, num, self.den.clone());
        }
        let l = self.den.lcm(&other.den);
        let fa = &l / &self.den;
        let fb = &l / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| combine(&(a * &fa), &(b * &fb)))
            .collect();
        CycNum::from_parts(&self.field, num, l)
    }

    fn mul_impl(&self, other: &CycNum) -> CycNum {
        let phi = self.field.phi;
        let mut raw = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        CycNum::from_parts(&self.field, self.field.reduce(&raw), &self.den * &other.den)
    }

    /// Multiplies by an integer.
    pub fn scale_int(&self, c: &BigInt) -> CycNum {
        CycNum::from_parts(&self.field, self.num.iter().map(|x| x * c).collect(), self.den.clone())
    }

    pub fn scale_rational(&self, c: &BigRational) -> CycNum {
        CycNum::from_parts(
            &self.field,
            self.num.iter().map(|x| x * c.numer()).collect(),
            &self.den * c.denom(),
        )
    }

    /// Multiplicative inverse, via the extended Euclidean algorithm of the
    /// representative polynomial against Φ_N over Q.
    pub fn inv(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let a: Vec<BigRational> = self.num.iter().map(|c| BigRational::from(c.clone())).collect();
        let m: Vec<BigRational> = self
            .field
            .modulus
            .coeffs
            .iter()
            .map(|c| BigRational::from(c.clone()))
            .collect();
        let s = ratpoly::inverse_mod(&a, &m)
            .ok_or_else(|| Error::Invariant("representative shares a factor with the cyclotomic polynomial".into()))?;
        let den = BigRational::from(self.den.clone());
        let scaled: Vec<BigRational> = s.iter().map(|c| c * &den).collect();
        Ok(CycNum::from_coeffs(&self.field, &scaled))
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<CycNum> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycNum::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base);
            }
        }
        Ok(acc)
    }

    /// Image under the automorphism ζ ↦ ζ^ℓ.
    pub fn galois(&self, l: i64) -> Result<CycNum> {
        let n = self.field.level;
        check_coprime(l, n)?;
        let l = modn(l, n) as u64;
        let mut sum = vec![BigInt::zero(); n as usize];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                sum[(i as u64 * l % n as u64) as usize] += c;
            }
        }
        Ok(CycNum::from_parts(
            &self.field,
            self.field.fold_zeta_sum(&sum),
            self.den.clone(),
        ))
    }

    /// Norm from Q(ζ_N) down to Q, as the resultant `Res(Φ_N, a)`.
    pub fn norm(&self) -> BigRational {
        let a: Vec<BigRational> = self.num.iter().map(|c| BigRational::from(c.clone())).collect();
        let m: Vec<BigRational> = self
            .field
            .modulus
            .coeffs
            .iter()
            .map(|c| BigRational::from(c.clone()))
            .collect();
        let res = ratpoly::resultant(&m, &a);
        let scale = num_traits::pow(BigRational::from(self.den.clone()), self.field.phi);
        res / scale
    }

    /// Integral with norm ±1.
    pub fn is_unit(&self) -> bool {
        self.is_integral() && self.norm().abs().is_one()
    }

    /// Coefficients as `"num/den"` strings, each in lowest terms.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs()
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect()
    }

    pub fn from_strings(field: &Arc<CycField>, items: &[String]) -> Result<CycNum> {
        if items.len() != field.phi {
            return Err(Error::Parse(format!(
                "expected {} coefficients at level {}, got {}",
                field.phi,
                field.level,
                items.len()
            )));
        }
        let coeffs = items.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Ok(CycNum::from_coeffs(field, &coeffs))
    }

    /// Largest bit length among numerators and denominator.
    pub fn bits(&self) -> u64 {
        self.num
            .iter()
            .map(|c| c.bits())
            .chain(std::iter::once(self.den.bits()))
            .max()
            .unwrap_or(0)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        self.field.level == other.field.level && self.den == other.den && self.num == other.num
    }
}

impl Eq for CycNum {}

impl Hash for CycNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.level.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum[N={}]({})", self.field.level, self)
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            let mag_s = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag_s}")?,
                (1, true) => write!(f, "ζ")?,
                (1, false) => write!(f, "{mag_s}ζ")?,
                (_, true) => write!(f, "ζ^{i}")?,
                (_, false) => write!(f, "{mag_s}ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a CycNum> for &'a CycNum {
            type Output = CycNum;
            /// Panics on level mismatch; use the checked variant to get an error instead.
            fn $m(self, rhs: &'a CycNum) -> CycNum {
                self.$checked(rhs).expect("cyclotomic level mismatch")
            }
        }
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: CycNum) -> CycNum {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

/// `add`, `sub` or `mul` of two elements at the same level.
pub fn cyc_arith(a: &CycNum, b: &CycNum, which: CycOp) -> Result<CycNum> {
    match which {
        CycOp::Add => a.checked_add(b),
        CycOp::Sub => a.checked_sub(b),
        CycOp::Mul => a.checked_mul(b),
    }
}

/// The exact quotient `(1 − ζ^ℓ)/(1 − ζ^k)` at level `n`, checked to be integral.
///
/// Requires `k ≢ 0 (mod n)` and `gcd(k, n) | ℓ`; returns zero when `ℓ ≡ 0`.
pub fn unit_ratio(k: i64, l: i64, n: i64) -> Result<CycNum> {
    let n = check_level(n)?;
    if modn(k, n) == 0 {
        return Err(Error::Precondition(format!("k = {k} is divisible by {n}")));
    }
    let delta = gcd(k, n as i64);
    if l % delta != 0 {
        return Err(Error::Precondition(format!(
            "gcd({k}, {n}) = {delta} does not divide {l}"
        )));
    }
    let field = CycField::get(n)?;
    if modn(l, n) == 0 {
        return Ok(CycNum::zero(&field));
    }
    let q = CycNum::one_minus_zeta(&field, l).checked_div(&CycNum::one_minus_zeta(&field, k))?;
    if !q.is_integral() {
        return Err(Error::NotIntegral(format!(
            "(1 - ζ^{l})/(1 - ζ^{k}) = {q} at level {n}"
        )));
    }
    Ok(q)
}

/// Dense polynomials over Q used by inversion and resultants.
mod ratpoly {
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn trim(p: &mut Vec<BigRational>) {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
    }

    fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut rem = a.to_vec();
        trim(&mut rem);
        let db = b.len() - 1;
        let lead_inv = b[db].recip();
        if rem.len() <= db {
            return (Vec::new(), rem);
        }
        let mut quot = vec![BigRational::zero(); rem.len() - db];
        for top in (db..rem.len()).rev() {
            let c = &rem[top] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                let t = &c * bj;
                rem[top - db + j] -= t;
            }
            quot[top - db] = c;
        }
        rem.truncate(db);
        trim(&mut rem);
        (quot, rem)
    }

    fn sub_mul(a: &[BigRational], q: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let len = a.len().max(if q.is_empty() || b.is_empty() {
            0
        } else {
            q.len() + b.len() - 1
        });
        let mut out = vec![BigRational::zero(); len];
        for (i, x) in a.iter().enumerate() {
            out[i] += x;
        }
        for (i, x) in q.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] -= x * y;
            }
        }
        trim(&mut out);
        out
    }

    /// `s` with `s·a ≡ 1 (mod m)`, or `None` if `gcd(a, m) ≠ 1`.
    pub fn inverse_mod(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
        let mut r0 = m.to_vec();
        let mut r1 = a.to_vec();
        trim(&mut r0);
        trim(&mut r1);
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = div_rem(&r0, &r1);
            let s2 = sub_mul(&s0, &q, &s1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = r0[0].recip();
        let (_, s) = div_rem(&s0.iter().map(|x| x * &c).collect::<Vec<_>>(), m);
        Some(s)
    }

    /// Resultant `Res(f, g)` by the Euclidean recursion.
    pub fn resultant(f: &[BigRational], g: &[BigRational]) -> BigRational {
        let mut a = f.to_vec();
        let mut b = g.to_vec();
        trim(&mut a);
        trim(&mut b);
        if a.is_empty() || b.is_empty() {
            return BigRational::zero();
        }
        let mut acc = BigRational::one();
        loop {
            let m = a.len() - 1;
            let n = b.len() - 1;
            if n == 0 {
                return acc * num_traits::pow(b[0].clone(), m);
            }
            let (_, r) = div_rem(&a, &b);
            if r.is_empty() {
                return BigRational::zero();
            }
            if (m * n) % 2 == 1 {
                acc = -acc;
            }
            acc *= num_traits::pow(b[n].clone(), m - (r.len() - 1));
            a = b;
            b = r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: u32) -> Arc<CycField> {
        CycField::get(n).unwrap()
    }

    fn z(n: u32, m: i64) -> CycNum {
        CycNum::zeta_pow(&field(n), m)
    }

    fn int(n: u32, v: i64) -> CycNum {
        CycNum::from_int(&field(n), v)
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn poly(c: &[i64]) -> CycPolynomial {
        CycPolynomial::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(2).unwrap(), poly(&[1, 1]));
        assert_eq!(cyclotomic_poly(4).unwrap(), poly(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(12).unwrap(), poly(&[1, 0, -1, 0, 1]));
        assert!(cyclotomic_poly(1).is_err());
        assert_eq!(cyclotomic_poly(12).unwrap().to_string(), "x^4 - x^2 + 1");
    }

    #[test]
    fn phi_divides_x_n_minus_one() {
        for n in 2..40u32 {
            let p = cyclotomic_poly(n as i64).unwrap();
            assert!(p.leading().unwrap().is_one());
            let mut xn = vec![BigInt::zero(); n as usize + 1];
            xn[0] = BigInt::from(-1);
            xn[n as usize] = BigInt::one();
            let (_, r) = CycPolynomial::new(xn).div_rem_monic(&p);
            assert!(r.coeffs().is_empty(), "Phi_{n} does not divide x^{n}-1");
        }
    }

    #[test]
    fn level_three_arithmetic() {
        assert_eq!(&z(3, 1) * &z(3, 1), &int(3, -1) - &z(3, 1));
        assert_eq!(&z(3, 1) + &z(3, 2), int(3, -1));
        let a = CycNum::one_minus_zeta(&field(3), 1);
        let b = CycNum::one_minus_zeta(&field(3), 2);
        assert_eq!(&a * &b, int(3, 3));
        assert_eq!(cyc_arith(&a, &b, CycOp::Mul).unwrap(), int(3, 3));
    }

    #[test]
    fn level_mismatch_is_an_error() {
        assert_eq!(z(3, 1).checked_add(&z(4, 1)), Err(Error::LevelMismatch(3, 4)));
        assert!(cyc_arith(&z(5, 1), &z(6, 1), CycOp::Mul).is_err());
    }

    #[test]
    fn inverses_at_level_four() {
        assert_eq!(z(4, 1).inv().unwrap(), -z(4, 1));
        let one_minus_i = CycNum::one_minus_zeta(&field(4), 1);
        let expected = CycNum::from_coeffs(&field(4), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(one_minus_i.inv().unwrap(), expected);
        assert_eq!(int(4, 2).inv().unwrap(), CycNum::from_rational(&field(4), &rat(1, 2)));
        assert_eq!(CycNum::zero(&field(4)).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn galois_examples() {
        assert_eq!(z(5, 1).galois(2).unwrap(), z(5, 2));
        let a = CycNum::one_minus_zeta(&field(5), 1);
        let expected = CycNum::from_int_coeffs(&field(5), &[2, 1, 1, 1]);
        assert_eq!(a.galois(4).unwrap(), expected);
        assert_eq!(a.galois(1).unwrap(), a);
        assert!(a.galois(5).is_err());
        assert!(z(6, 1).galois(3).is_err());
    }

    #[test]
    fn integrality_examples() {
        assert!(CycNum::one_minus_zeta(&field(3), 1).is_integral());
        let third = CycNum::from_rational(&field(3), &rat(1, 3));
        assert!(!(&z(3, 1) * &third).is_integral());
        let q = CycNum::one_minus_zeta(&field(5), 2)
            .checked_div(&CycNum::one_minus_zeta(&field(5), 1))
            .unwrap();
        assert!(q.is_integral());
        assert_eq!(q, &int(5, 1) + &z(5, 1));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(CycNum::one_minus_zeta(&field(4), 1).norm(), rat(2, 1));
        let u = CycNum::one_minus_zeta(&field(6), 1);
        assert_eq!(u.norm(), rat(1, 1));
        assert!(u.is_unit());
        assert_eq!(int(5, 5).norm(), rat(625, 1));
        assert_eq!(CycNum::from_rational(&field(3), &rat(-2, 3)).norm(), rat(4, 9));
        assert_eq!(CycNum::zero(&field(7)).norm(), rat(0, 1));
    }

    #[test]
    fn unit_ratio_examples() {
        assert_eq!(unit_ratio(1, 2, 5).unwrap(), &int(5, 1) + &z(5, 1));
        assert_eq!(unit_ratio(2, 4, 6).unwrap(), &int(6, 1) + &z(6, 2));
        assert!(unit_ratio(1, 0, 4).unwrap().is_zero());
        assert!(unit_ratio(2, 3, 6).is_err());
        assert!(unit_ratio(6, 1, 6).is_err());
    }

    #[test]
    fn string_round_trip() {
        let f = field(7);
        let a = CycNum::from_coeffs(&f, &[rat(1, 2), rat(-2, 3), rat(0, 1), rat(5, 1)]);
        let s = a.to_strings();
        assert_eq!(s[0], "1/2");
        assert_eq!(s[1], "-2/3");
        assert_eq!(s[2], "0/1");
        assert_eq!(CycNum::from_strings(&f, &s).unwrap(), a);
        assert!(CycNum::from_strings(&f, &s[..3]).is_err());
        assert_eq!(serde_json::to_string(&int(3, 1)).unwrap(), r#"["1/1","0/1"]"#);
    }

    #[test]
    fn display_is_readable() {
        let a = &int(3, -3) + &z(3, 1).scale_int(&BigInt::from(3));
        assert_eq!(a.to_string(), "-3 + 3ζ");
        assert_eq!(CycNum::zero(&field(5)).to_string(), "0");
    }
}
