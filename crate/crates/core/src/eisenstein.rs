//! The weight-2 functions `E(τ; r, s) = ℘((rτ + s)/N; L_τ)/(2πi)² − 1/12`.
//!
//! With `q = e^(2πiτ/N)`, `ω = ζ^(μ(r)s)` and `u = ω q^{r}` the expansion is
//!
//! ```text
//! {r} = 0:  ω/(1−ω)² + Σ_{m,n≥1} n(ωⁿ + ω⁻ⁿ − 2) q^(mnN)
//! {r} > 0:  Σ_{n≥1} n uⁿ + Σ_{m,n≥1} n(uⁿ + u⁻ⁿ − 2) q^(mnN)
//! ```
//!
//! Terms are enumerated by their exact exponent, so the `u⁻ⁿ q^(mnN)` terms
//! that land on low exponents when `{r} = N/2` are accumulated correctly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{check_level, modn};
use crate::cyclotomic::{CycField, CycNum};
use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::sl2::SL2Mat;

/// A residue pair `(r, s)` modulo N, not both zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    level: u32,
    r: u32,
    s: u32,
}

/// `{r}`, `μ(r)` and the exponent of `ω = ζ^(μ(r)s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedIndex {
    pub brace: u32,
    pub mu: i8,
    pub omega_exponent: u32,
}

impl IndexPair {
    pub fn new(level: u32, r: i64, s: i64) -> Result<IndexPair> {
        check_level(level as i64)?;
        let (rr, ss) = (modn(r, level), modn(s, level));
        if rr == 0 && ss == 0 {
            return Err(Error::ZeroIndex { level, r, s });
        }
        Ok(IndexPair { level, r: rr, s: ss })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn neg(&self) -> IndexPair {
        IndexPair {
            level: self.level,
            r: (self.level - self.r) % self.level,
            s: (self.level - self.s) % self.level,
        }
    }

    /// `self + other`, failing if the sum is `(0, 0)`.
    pub fn add(&self, other: &IndexPair) -> Result<IndexPair> {
        IndexPair::new(
            self.level,
            self.r as i64 + other.r as i64,
            self.s as i64 + other.s as i64,
        )
    }

    /// True iff `other ≡ ±self`.
    pub fn is_pm(&self, other: &IndexPair) -> bool {
        self == other || self.neg() == *other
    }

    /// Representative of `{p, −p}`, the key under which E-values coincide.
    pub fn canonical(&self) -> IndexPair {
        let n = self.neg();
        if (n.r, n.s) < (self.r, self.s) {
            n
        } else {
            *self
        }
    }

    pub fn reduced(&self) -> ReducedIndex {
        let (brace, mu) = brace_mu(self.r as i64, self.level);
        ReducedIndex {
            brace,
            mu,
            omega_exponent: modn(mu as i64 * self.s as i64, self.level),
        }
    }

    pub fn parse(level: u32, s: &str) -> Result<IndexPair> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("bad index pair {s:?}")))?;
        match v.as_slice() {
            [r, s] => IndexPair::new(level, *r, *s),
            _ => Err(Error::Parse(format!("expected r,s, got {s:?}"))),
        }
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) mod {}", self.r, self.s, self.level)
    }
}

/// `({x}, μ(x))`: `0 ≤ {x} ≤ N/2`, `x ≡ μ(x){x} (mod N)`, and `μ(x) = 1`
/// whenever `x ≡ 0` or `x ≡ N/2`.
pub fn brace_mu(x: i64, n: u32) -> (u32, i8) {
    let r = modn(x, n);
    if r == 0 || 2 * r <= n {
        (r, 1)
    } else {
        (n - r, -1)
    }
}

/// `(ar + cs, br + ds) mod N`, the index of `E(τ; r, s)[A]₂`.
pub fn index_transform(p: &IndexPair, m: &SL2Mat) -> Result<IndexPair> {
    SL2Mat::new(m.a, m.b, m.c, m.d)?;
    let (r, s) = (p.r as i128, p.s as i128);
    let n = p.level as i128;
    let nr = (m.a as i128 * r + m.c as i128 * s).rem_euclid(n) as i64;
    let ns = (m.b as i128 * r + m.d as i128 * s).rem_euclid(n) as i64;
    IndexPair::new(p.level, nr, ns)
}

/// Expansion of `E(τ; r, s)` modulo `q^precision`, recomputed from scratch.
pub fn e_series_uncached(p: &IndexPair, precision: i64) -> Result<QSeries> {
    if precision < 1 {
        return Err(Error::Precondition(format!("precision {precision} < 1")));
    }
    let n = p.level;
    let nn = n as i64;
    let field = CycField::get(n)?;
    let red = p.reduced();
    let t = red.brace as i64;
    let w = red.omega_exponent as i64;
    let len = precision as usize;
    // sums[e][j] is the coefficient of ζ^j q^e
    let mut sums = vec![vec![0i64; n as usize]; len];
    let mut bump = |e: i64, zexp: i64, v: i64| {
        if e < precision {
            sums[e as usize][modn(zexp, n) as usize] += v;
        }
    };
    if t > 0 {
        let mut k = 1;
        while k * t < precision {
            bump(k * t, w * k, k);
            k += 1;
        }
    }
    let mut m = 1;
    while m * nn - t < precision {
        let base = m * nn - t;
        let mut k = 1;
        while k * base < precision {
            bump(k * (m * nn + t), w * k, k);
            bump(k * base, -w * k, k);
            bump(k * m * nn, 0, -2 * k);
            k += 1;
        }
        m += 1;
    }
    let mut coeffs: Vec<CycNum> = sums
        .iter()
        .map(|row| {
            let big: Vec<BigInt> = row.iter().map(|&v| BigInt::from(v)).collect();
            CycNum::from_parts(&field, field.fold_zeta_sum(&big), BigInt::from(1))
        })
        .collect();
    if t == 0 {
        let omega = CycNum::zeta_pow(&field, w);
        let denom = CycNum::one_minus_zeta(&field, w).pow(2)?;
        coeffs[0] = &coeffs[0] + &omega.checked_div(&denom)?;
    }
    QSeries::new(&field, 0, coeffs, precision)
}

type CacheKey = (u32, u32, u32);

fn cache() -> &'static RwLock<HashMap<CacheKey, QSeries>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, QSeries>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Expansion of `E(τ; r, s)` modulo `q^precision`.
///
/// Memoized per `(N, ±(r, s))`; the stored entry is the longest expansion
/// computed so far and shorter requests are truncations of it.
pub fn e_series(p: &IndexPair, precision: i64) -> Result<QSeries> {
    let c = p.canonical();
    let key = (c.level, c.r, c.s);
    if let Some(s) = cache().read().unwrap().get(&key) {
        if s.precision() >= precision {
            return Ok(s.truncate(precision));
        }
    }
    let s = e_series_uncached(&c, precision)?;
    let mut map = cache().write().unwrap();
    let keep = match map.get(&key) {
        Some(old) => old.precision() < precision,
        None => true,
    };
    if keep {
        map.insert(key, s.clone());
    }
    Ok(s)
}

fn check_pair(p1: &IndexPair, p2: &IndexPair) -> Result<()> {
    if p1.level != p2.level {
        return Err(Error::LevelMismatch(p1.level, p2.level));
    }
    if p1.is_pm(p2) {
        return Err(Error::DegenerateDifference(p1.to_string(), p2.to_string()));
    }
    Ok(())
}

/// `E(τ; p1) − E(τ; p2)` modulo `q^precision`; fails when `p2 ≡ ±p1`.
pub fn e_diff_series(p1: &IndexPair, p2: &IndexPair, precision: i64) -> Result<QSeries> {
    check_pair(p1, p2)?;
    e_series(p1, precision)?.checked_sub(&e_series(p2, precision)?)
}

/// Leading exponent `t` and coefficient `θ` of `E(τ; p1) − E(τ; p2)`.
///
/// The table is stated for `{r1} ≤ {r2}`; if the arguments come the other way
/// round the difference is negated and so is the returned `θ`.
pub fn theta_leading(p1: &IndexPair, p2: &IndexPair) -> Result<(i64, CycNum)> {
    check_pair(p1, p2)?;
    let field = CycField::get(p1.level)?;
    let (x, y, sign) = if p1.reduced().brace <= p2.reduced().brace {
        (p1, p2, 1)
    } else {
        (p2, p1, -1)
    };
    let (rx, ry) = (x.reduced(), y.reduced());
    let w1 = CycNum::zeta_pow(&field, rx.omega_exponent as i64);
    let w2 = CycNum::zeta_pow(&field, ry.omega_exponent as i64);
    let one = CycNum::one(&field);
    let t = rx.brace as i64;
    let theta = if rx.brace == ry.brace {
        let diff = &w1 - &w2;
        let cross = &one - &(&w1 * &w2);
        if t == 0 {
            let den = &(&one - &w1).pow(2)? * &(&one - &w2).pow(2)?;
            (&diff * &cross).checked_div(&den)?
        } else if 2 * t == p1.level as i64 {
            -(&diff * &cross).checked_div(&(&w1 * &w2))?
        } else {
            diff
        }
    } else if t != 0 {
        w1
    } else {
        w1.checked_div(&(&one - &w1).pow(2)?)?
    };
    if theta.is_zero() {
        return Err(Error::Invariant(format!(
            "leading coefficient vanished for {p1} and {p2}"
        )));
    }
    let theta = if sign < 0 { -theta } else { theta };
    Ok((t, theta))
}

/// Closed form of `E(τ; p1) − E(τ; p2)` modulo `q^N`, from the three-case
/// congruence table (sorted so that `{r1} ≤ {r2}`, negated otherwise).
pub fn e_diff_congruence(p1: &IndexPair, p2: &IndexPair) -> Result<QSeries> {
    check_pair(p1, p2)?;
    let (x, y, swapped) = if p1.reduced().brace <= p2.reduced().brace {
        (p1, p2, false)
    } else {
        (p2, p1, true)
    };
    let n = p1.level as i64;
    let field = CycField::get(p1.level)?;
    let (rx, ry) = (x.reduced(), y.reduced());
    let (t1, t2) = (rx.brace as i64, ry.brace as i64);
    let (e1, e2) = (rx.omega_exponent as i64, ry.omega_exponent as i64);
    let one = CycNum::one(&field);
    let z = |m: i64| CycNum::zeta_pow(&field, m);
    let mut coeffs = vec![CycNum::zero(&field); n as usize];
    let mut put = |e: i64, c: CycNum| {
        if e < n {
            coeffs[e as usize] = &coeffs[e as usize] + &c;
        }
    };
    // Σ n uⁿ (n < N) plus u⁻¹ q^N, for an index with {r} > 0
    let u_part = |t: i64, w: i64, sign: i64, put: &mut dyn FnMut(i64, CycNum)| {
        for k in 1..n {
            put(k * t, z(w * k).scale_int(&BigInt::from(sign * k)));
        }
        put(n - t, z(-w).scale_int(&BigInt::from(sign)));
    };
    let w1 = z(e1);
    let w2 = z(e2);
    let const_of = |w: &CycNum, e: i64| -> Result<CycNum> { w.checked_div(&CycNum::one_minus_zeta(&field, e).pow(2)?) };
    match (t1, t2) {
        (0, 0) => {
            let num = &(&w1 - &w2) * &(&one - &(&w1 * &w2));
            let den = &CycNum::one_minus_zeta(&field, e1).pow(2)? * &CycNum::one_minus_zeta(&field, e2).pow(2)?;
            put(0, num.checked_div(&den)?);
        }
        (0, _) => {
            put(0, const_of(&w1, e1)?);
            u_part(t2, e2, -1, &mut put);
        }
        _ => {
            u_part(t1, e1, 1, &mut put);
            u_part(t2, e2, -1, &mut put);
        }
    }
    let s = QSeries::new(&field, 0, coeffs, n)?;
    Ok(if swapped { -&s } else { s })
}
