//! Truncated Laurent series in q with coefficients in Q(ζ_N).
//!
//! A [`QSeries`] is known modulo `q^precision`. Nonzero series store every
//! coefficient from `order` (the first nonzero one) up to `precision − 1`, so
//! `precision = order + coeffs.len()`. The zero series keeps its precision and
//! reports `order == precision`.
//!
//! Precision only ever shrinks: sums keep the smaller precision, products and
//! quotients keep the smaller relative precision.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycField, CycNum};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct QSeries {
    field: Arc<CycField>,
    order: i64,
    coeffs: Vec<CycNum>,
    precision: i64,
}

impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        self.level() == other.level()
            && self.order == other.order
            && self.precision == other.precision
            && self.coeffs == other.coeffs
    }
}

impl Eq for QSeries {}

fn coeff_ref(s: &QSeries, e: i64) -> Option<&CycNum> {
    (e >= s.order && e < s.order + s.coeffs.len() as i64).then(|| &s.coeffs[(e - s.order) as usize])
}

/// Selector for [`series_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
}

impl QSeries {
    /// `O(q^precision)`.
    pub fn zero(field: &Arc<CycField>, precision: i64) -> QSeries {
        QSeries {
            field: field.clone(),
            order: precision,
            coeffs: Vec::new(),
            precision,
        }
    }

    /// Series `Σ coeffs[i] q^(order+i) + O(q^precision)`; missing trailing
    /// coefficients below `precision` are zero.
    pub fn new(field: &Arc<CycField>, order: i64, mut coeffs: Vec<CycNum>, precision: i64) -> Result<QSeries> {
        if let Some(c) = coeffs.iter().find(|c| c.level() != field.level()) {
            return Err(Error::LevelMismatch(field.level(), c.level()));
        }
        let known = (precision - order).max(0) as usize;
        coeffs.truncate(known);
        coeffs.resize(known, CycNum::zero(field));
        Ok(QSeries {
            field: field.clone(),
            order,
            coeffs,
            precision,
        }
        .canonical())
    }

    /// Rational-integer coefficients starting at `order`.
    pub fn from_ints(field: &Arc<CycField>, order: i64, ints: &[i64], precision: i64) -> QSeries {
        let coeffs = ints.iter().map(|&v| CycNum::from_int(field, v)).collect();
        QSeries::new(field, order, coeffs, precision).unwrap()
    }

    /// `c·q^exponent + O(q^precision)`.
    pub fn monomial(c: CycNum, exponent: i64, precision: i64) -> QSeries {
        let field = c.field().clone();
        QSeries::new(&field, exponent, vec![c], precision).unwrap()
    }

    pub fn constant(c: CycNum, precision: i64) -> QSeries {
        QSeries::monomial(c, 0, precision)
    }

    pub fn one(field: &Arc<CycField>, precision: i64) -> QSeries {
        QSeries::constant(CycNum::one(field), precision)
    }

    fn canonical(mut self) -> QSeries {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.order = self.precision;
            }
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.order += k as i64;
            }
        }
        self
    }

    pub fn level(&self) -> u32 {
        self.field.level()
    }

    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    /// Exponent of the first nonzero coefficient (`precision` for zero).
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Coefficients from `order` to `precision − 1`.
    pub fn coeffs(&self) -> &[CycNum] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&CycNum> {
        self.coeffs.first()
    }

    /// Coefficient of `q^e`, or `None` when `e` is beyond the known precision.
    pub fn coeff(&self, e: i64) -> Option<CycNum> {
        if e >= self.precision {
            None
        } else if e < self.order {
            Some(CycNum::zero(&self.field))
        } else {
            Some(self.coeffs[(e - self.order) as usize].clone())
        }
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &CycNum)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.order + i as i64, c))
    }

    /// Drops everything from `q^p` on; no-op if `p` is not below the precision.
    pub fn truncate(&self, p: i64) -> QSeries {
        if p >= self.precision {
            return self.clone();
        }
        let keep = (p - self.order).max(0) as usize;
        QSeries {
            field: self.field.clone(),
            order: self.order,
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
            precision: p,
        }
        .canonical()
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> QSeries {
        QSeries {
            field: self.field.clone(),
            order: self.order + k,
            coeffs: self.coeffs.clone(),
            precision: self.precision + k,
        }
    }

    /// True when both agree on every exponent below `p` (which must be known in both).
    pub fn eq_mod(&self, other: &QSeries, p: i64) -> bool {
        if p > self.precision || p > other.precision {
            return false;
        }
        self.truncate(p) == other.truncate(p)
    }

    fn check_level(&self, other: &QSeries) -> Result<()> {
        if self.level() != other.level() {
            return Err(Error::LevelMismatch(self.level(), other.level()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &QSeries) -> Result<QSeries> {
        self.check_level(other)?;
        Ok(self.add_sub(other, false))
    }

    pub fn checked_sub(&self, other: &QSeries) -> Result<QSeries> {
        self.check_level(other)?;
        Ok(self.add_sub(other, true))
    }

    fn add_sub(&self, other: &QSeries, sub: bool) -> QSeries {
        let precision = self.precision.min(other.precision);
        let order = self.order.min(other.order).min(precision);
        let zero = CycNum::zero(&self.field);
        let coeffs = (order..precision)
            .map(|e| match (coeff_ref(self, e), coeff_ref(other, e)) {
                (Some(a), Some(b)) => {
                    if sub {
                        a - b
                    } else {
                        a + b
                    }
                }
                (Some(a), None) => a.clone(),
                (None, Some(b)) => {
                    if sub {
                        -b
                    } else {
                        b.clone()
                    }
                }
                (None, None) => zero.clone(),
            })
            .collect();
        QSeries {
            field: self.field.clone(),
            order,
            coeffs,
            precision,
        }
        .canonical()
    }

    pub fn checked_mul(&self, other: &QSeries) -> Result<QSeries> {
        self.check_level(other)?;
        if self.is_zero() || other.is_zero() {
            let p = (self.precision + other.order).min(other.precision + self.order);
            return Ok(QSeries::zero(&self.field, p));
        }
        let order = self.order + other.order;
        let rel = self.relative_precision().min(other.relative_precision());
        let (a, da) = clear_denominators(&self.coeffs[..rel]);
        let (b, db) = clear_denominators(&other.coeffs[..rel]);
        let prod = convolve(&self.field, &a, &b, rel);
        let den = da * db;
        let coeffs = prod
            .into_iter()
            .map(|v| CycNum::from_parts(&self.field, v, den.clone()))
            .collect();
        Ok(QSeries {
            field: self.field.clone(),
            order,
            coeffs,
            precision: order + rel as i64,
        }
        .canonical())
    }

    /// Number of known coefficients from `order` on.
    pub fn relative_precision(&self) -> usize {
        (self.precision - self.order).max(0) as usize
    }

    /// Laurent quotient `self / other`.
    pub fn checked_div(&self, other: &QSeries) -> Result<QSeries> {
        self.check_level(other)?;
        let lead = other.leading().ok_or(Error::DivisionByZero)?;
        let order = self.order - other.order;
        if self.is_zero() {
            return Ok(QSeries::zero(&self.field, self.precision - other.order));
        }
        let rel = self.relative_precision().min(other.relative_precision());
        let c = lead.inv()?;
        let g: Vec<CycNum> = other.coeffs[..rel].iter().map(|x| x * &c).collect();
        let f: Vec<CycNum> = self.coeffs[..rel].iter().map(|x| x * &c).collect();
        let coeffs = if g.iter().all(CycNum::is_integral) {
            let (fi, df) = clear_denominators(&f);
            let gi: Vec<Vec<BigInt>> = g.iter().map(|x| x.numerators().to_vec()).collect();
            divide_unit(&self.field, &fi, &gi)
                .into_iter()
                .map(|v| CycNum::from_parts(&self.field, v, df.clone()))
                .collect()
        } else {
            divide_generic(&f, &g)
        };
        Ok(QSeries {
            field: self.field.clone(),
            order,
            coeffs,
            precision: order + rel as i64,
        }
        .canonical())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &CycNum) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(&self.field, self.precision);
        }
        QSeries {
            field: self.field.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            precision: self.precision,
        }
        .canonical()
    }

    pub fn scale_int(&self, c: &BigInt) -> QSeries {
        self.scale(&CycNum::from_bigint(&self.field, c.clone()))
    }

    /// Coefficient-wise automorphism ζ ↦ ζ^ℓ.
    pub fn galois(&self, l: i64) -> Result<QSeries> {
        let coeffs = self.coeffs.iter().map(|c| c.galois(l)).collect::<Result<Vec<_>>>()?;
        Ok(QSeries { coeffs, ..self.clone() })
    }

    /// True iff every known coefficient lies in Z[ζ_N].
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(CycNum::is_integral)
    }

    /// First known coefficient outside Z[ζ_N].
    pub fn first_non_integral(&self) -> Option<(i64, &CycNum)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_integral())
            .map(|(i, c)| (self.order + i as i64, c))
    }

    pub fn pow(&self, e: u32) -> Result<QSeries> {
        if e == 0 {
            return Ok(QSeries::one(&self.field, self.relative_precision() as i64));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> QSeriesJson {
        QSeriesJson {
            level: self.level(),
            order: self.order,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(CycNum::to_strings).collect(),
        }
    }

    pub fn from_json(j: &QSeriesJson) -> Result<QSeries> {
        let field = CycField::get(j.level)?;
        let coeffs = j
            .coeffs
            .iter()
            .map(|c| CycNum::from_strings(&field, c))
            .collect::<Result<Vec<_>>>()?;
        if j.order + coeffs.len() as i64 > j.precision {
            return Err(Error::Parse("more coefficients than the precision allows".into()));
        }
        QSeries::new(&field, j.order, coeffs, j.precision)
    }
}

/// Wire form: `{"level", "order", "precision", "coeffs": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeriesJson {
    pub level: u32,
    pub order: i64,
    pub precision: i64,
    pub coeffs: Vec<Vec<String>>,
}

impl Serialize for QSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSeries[N={}]({})", self.level(), self)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, c) in self.terms() {
            write!(f, "({c})q^{e} + ")?;
        }
        write!(f, "O(q^{})", self.precision)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> std::ops::$tr<&'a QSeries> for &'a QSeries {
            type Output = QSeries;
            fn $m(self, rhs: &'a QSeries) -> QSeries {
                self.$checked(rhs).expect("q-series level mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }
}

/// `add`, `sub` or `mul` of two series at the same level.
pub fn series_arith(f: &QSeries, g: &QSeries, which: SeriesOp) -> Result<QSeries> {
    match which {
        SeriesOp::Add => f.checked_add(g),
        SeriesOp::Sub => f.checked_sub(g),
        SeriesOp::Mul => f.checked_mul(g),
    }
}

/// Scales a coefficient list to integers: returns numerator vectors and the common denominator.
fn clear_denominators(coeffs: &[CycNum]) -> (Vec<Vec<BigInt>>, BigInt) {
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| {
        if c.denominator().is_one() {
            acc
        } else {
            acc.lcm(c.denominator())
        }
    });
    let ints = coeffs
        .iter()
        .map(|c| {
            if c.denominator() == &den {
                c.numerators().to_vec()
            } else {
                let f = &den / c.denominator();
                c.numerators().iter().map(|x| x * &f).collect()
            }
        })
        .collect();
    (ints, den)
}

fn to_small(v: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    v.iter()
        .map(|c| c.iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>())
        .collect()
}

const PAR_THRESHOLD: usize = 48;

/// First `len` coefficients of the product of two integer series over Z[ζ_N].
fn convolve(field: &CycField, a: &[Vec<BigInt>], b: &[Vec<BigInt>], len: usize) -> Vec<Vec<BigInt>> {
    if let (Some(sa), Some(sb)) = (to_small(a), to_small(b)) {
        if let Some(out) = convolve_small(field, &sa, &sb, len) {
            return out
                .into_iter()
                .map(|v| v.into_iter().map(BigInt::from).collect())
                .collect();
        }
    }
    let phi = field.phi();
    let one_coeff = |n: usize| -> Vec<BigInt> {
        let mut raw = vec![BigInt::zero(); 2 * phi - 1];
        let lo = n.saturating_sub(b.len() - 1);
        for i in lo..=n.min(a.len() - 1) {
            let (x, y) = (&a[i], &b[n - i]);
            for (p, xp) in x.iter().enumerate() {
                if xp.is_zero() {
                    continue;
                }
                for (q, yq) in y.iter().enumerate() {
                    if !yq.is_zero() {
                        raw[p + q] += xp * yq;
                    }
                }
            }
        }
        field.reduce(&raw)
    };
    if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(one_coeff).collect()
    } else {
        (0..len).map(one_coeff).collect()
    }
}

fn convolve_small(field: &CycField, a: &[Vec<i64>], b: &[Vec<i64>], len: usize) -> Option<Vec<Vec<i128>>> {
    let phi = field.phi();
    let mut out = Vec::with_capacity(len);
    let mut raw = vec![0i128; 2 * phi - 1];
    for n in 0..len {
        raw.iter_mut().for_each(|r| *r = 0);
        let lo = n.saturating_sub(b.len() - 1);
        for i in lo..=n.min(a.len() - 1) {
            let (x, y) = (&a[i], &b[n - i]);
            for (p, &xp) in x.iter().enumerate() {
                if xp == 0 {
                    continue;
                }
                for (q, &yq) in y.iter().enumerate() {
                    if yq != 0 {
                        raw[p + q] = raw[p + q].checked_add(xp as i128 * yq as i128)?;
                    }
                }
            }
        }
        out.push(field.reduce_i128(&raw)?);
    }
    Some(out)
}

/// `f / g` for integer series with `g[0] = 1`, to `f.len()` terms.
fn divide_unit(field: &CycField, f: &[Vec<BigInt>], g: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    debug_assert!(g[0][0].is_one() && g[0][1..].iter().all(Zero::is_zero));
    if let (Some(sf), Some(sg)) = (to_small(f), to_small(g)) {
        if let Some(out) = divide_unit_small(field, &sf, &sg) {
            return out
                .into_iter()
                .map(|v| v.into_iter().map(BigInt::from).collect())
                .collect();
        }
    }
    let phi = field.phi();
    let mut h: Vec<Vec<BigInt>> = Vec::with_capacity(f.len());
    for n in 0..f.len() {
        let mut raw = vec![BigInt::zero(); 2 * phi - 1];
        for i in 1..=n.min(g.len() - 1) {
            for (p, gp) in g[i].iter().enumerate() {
                if gp.is_zero() {
                    continue;
                }
                for (q, hq) in h[n - i].iter().enumerate() {
                    if !hq.is_zero() {
                        raw[p + q] += gp * hq;
                    }
                }
            }
        }
        let s = field.reduce(&raw);
        h.push(f[n].iter().zip(s).map(|(a, b)| a - b).collect());
    }
    h
}

fn divide_unit_small(field: &CycField, f: &[Vec<i64>], g: &[Vec<i64>]) -> Option<Vec<Vec<i128>>> {
    let phi = field.phi();
    let mut h: Vec<Vec<i128>> = Vec::with_capacity(f.len());
    let mut raw = vec![0i128; 2 * phi - 1];
    for n in 0..f.len() {
        raw.iter_mut().for_each(|r| *r = 0);
        for i in 1..=n.min(g.len() - 1) {
            for (p, &gp) in g[i].iter().enumerate() {
                if gp == 0 {
                    continue;
                }
                for (q, &hq) in h[n - i].iter().enumerate() {
                    if hq != 0 {
                        let t = (gp as i128).checked_mul(hq)?;
                        raw[p + q] = raw[p + q].checked_add(t)?;
                    }
                }
            }
        }
        let s = field.reduce_i128(&raw)?;
        let next = f[n]
            .iter()
            .zip(s)
            .map(|(&a, b)| (a as i128).checked_sub(b))
            .collect::<Option<Vec<_>>>()?;
        // keep entries inside i64 so the next round's products fit
        if next.iter().any(|&x| x.unsigned_abs() > i64::MAX as u128) {
            return None;
        }
        h.push(next);
    }
    Some(h)
}

/// Recursive quotient over Q(ζ_N) for `g[0] = 1` with non-integral tail.
fn divide_generic(f: &[CycNum], g: &[CycNum]) -> Vec<CycNum> {
    let mut h: Vec<CycNum> = Vec::with_capacity(f.len());
    for n in 0..f.len() {
        let mut acc = f[n].clone();
        for i in 1..=n.min(g.len() - 1) {
            if !g[i].is_zero() {
                acc = &acc - &(&g[i] * &h[n - i]);
            }
        }
        h.push(acc);
    }
    h
}

/// Laurent quotient `f / g`.
pub fn series_div(f: &QSeries, g: &QSeries) -> Result<QSeries> {
    f.checked_div(g)
}

/// Coefficient-wise Galois action.
pub fn series_galois(f: &QSeries, l: i64) -> Result<QSeries> {
    f.galois(l)
}

pub fn series_is_integral(f: &QSeries) -> bool {
    f.is_integral()
}
