//! `Ψ_k(X) = ∏_A (X − C_N·Λ_k∘A)` over SL₂(Z)/Γ(N){±1}, with every
//! coefficient rewritten as a polynomial in `j` over Z[ζ].

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{check_coprime, check_level, modn};
use crate::cyclotomic::{CycField, CycNum};
use crate::eisenstein::{theta_leading, IndexPair};
use crate::error::{Error, Result};
use crate::lambda::{c_constant, lambda_composed};
use crate::qseries::QSeries;
use crate::sl2::SL2Mat;

pub use crate::sl2::{coset_reps, CosetReps};

fn mul_trunc(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `j` in `q̃ = e^(2πiτ)`: entry `i` multiplies `q̃^(i−1)`,
/// for every exponent below `precision`.
///
/// `j = E₄³/Δ` with `E₄ = 1 + 240Σσ₃(n)q̃ⁿ` and `Δ = q̃∏(1 − q̃ⁿ)²⁴`.
pub fn j_coefficients(precision: i64) -> Vec<BigInt> {
    let len = (precision + 1).max(1) as usize;
    let mut e4 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    #[allow(clippy::needless_range_loop)]
    for n in 1..len {
        let sigma3: u64 = (1..=n as u64)
            .filter(|d| (n as u64).is_multiple_of(*d))
            .map(|d| d * d * d)
            .sum();
        e4[n] = BigInt::from(240u64 * sigma3);
    }
    let e4_cubed = mul_trunc(&mul_trunc(&e4, &e4, len), &e4, len);
    let mut eta = vec![BigInt::zero(); len];
    eta[0] = BigInt::one();
    for n in 1..len {
        for i in (n..len).rev() {
            let t = eta[i - n].clone();
            eta[i] -= t;
        }
    }
    let e2 = mul_trunc(&eta, &eta, len);
    let e4p = mul_trunc(&e2, &e2, len);
    let e8 = mul_trunc(&e4p, &e4p, len);
    let e16 = mul_trunc(&e8, &e8, len);
    let disc = mul_trunc(&e16, &e8, len);
    // disc has constant term 1
    let mut out = vec![BigInt::zero(); len];
    for i in 0..len {
        let mut acc = e4_cubed[i].clone();
        for j in 1..=i {
            acc -= &disc[j] * &out[i - j];
        }
        out[i] = acc;
    }
    out
}

/// `j` as a series in `q = q̃^(1/N)`: order `−N`, precision `N·precision_qt`.
pub fn j_series(n: u32, precision_qt: i64) -> Result<QSeries> {
    let field = CycField::get(n)?;
    let nn = n as i64;
    let c = j_coefficients(precision_qt);
    let mut coeffs = vec![CycNum::zero(&field); ((precision_qt + 1) * nn) as usize];
    for (i, v) in c.iter().enumerate() {
        coeffs[i * n as usize] = CycNum::from_bigint(&field, v.clone());
    }
    QSeries::new(&field, -nn, coeffs, nn * precision_qt)
}

/// Powers `(q̃·j)^m`, `m = 0..=max_degree`, truncated to `len` terms.
#[derive(Debug, Clone)]
pub struct JPowers {
    len: usize,
    pows: Vec<Vec<BigInt>>,
}

impl JPowers {
    pub fn new(max_degree: usize, len: usize) -> JPowers {
        let len = len.max(1);
        let g = j_coefficients(len as i64 - 1);
        let mut pows = vec![{
            let mut one = vec![BigInt::zero(); len];
            one[0] = BigInt::one();
            one
        }];
        for m in 1..=max_degree {
            let next = mul_trunc(&pows[m - 1], &g, len);
            pows.push(next);
        }
        JPowers { len, pows }
    }

    pub fn max_degree(&self) -> usize {
        self.pows.len() - 1
    }
}

/// `f = Σ poly[m]·j^m` up to the known precision of `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JExpression {
    pub poly: Vec<CycNum>,
    pub remainder_zero: bool,
    /// Absolute q-precision through which the remainder was checked.
    pub checked_to: i64,
    /// First exponent (in q) where the remainder is nonzero.
    pub first_nonzero: Option<i64>,
}

/// Greedy reduction of a level-one series to a polynomial in `j`.
pub fn express_in_j(f: &QSeries) -> Result<JExpression> {
    let d = needed_degree(f)?;
    let pt = known_qt(f);
    let powers = JPowers::new(d, (pt + d as i64).max(1) as usize);
    express_in_j_with(f, &powers)
}

fn known_qt(f: &QSeries) -> i64 {
    let n = f.level() as i64;
    (f.precision() + n - 1).div_euclid(n)
}

fn needed_degree(f: &QSeries) -> Result<usize> {
    let n = f.level() as i64;
    if let Some((e, _)) = f.terms().find(|(e, _)| e % n != 0) {
        return Err(Error::NotLevelOne(e));
    }
    Ok(if f.is_zero() {
        0
    } else {
        (-f.order().div_euclid(n)).max(0) as usize
    })
}

/// As [`express_in_j`] with precomputed powers of `j`.
pub fn express_in_j_with(f: &QSeries, powers: &JPowers) -> Result<JExpression> {
    let n = f.level() as i64;
    let field = f.field();
    let d = needed_degree(f)?;
    let pt = known_qt(f);
    if pt <= 0 {
        return Err(Error::PrecisionInsufficient(format!(
            "constant term unknown at precision {}",
            f.precision()
        )));
    }
    if d > powers.max_degree() || (pt + d as i64) as usize > powers.len {
        return Err(Error::Precondition("not enough powers of j".into()));
    }
    // rem[i] is the coefficient of q̃^(i − d)
    let width = d + pt as usize;
    let mut rem: Vec<CycNum> = (0..width)
        .map(|i| f.coeff((i as i64 - d as i64) * n).expect("within precision"))
        .collect();
    let mut poly = vec![CycNum::zero(field); d + 1];
    for m in (1..=d).rev() {
        let c = rem[d - m].clone();
        if c.is_zero() {
            continue;
        }
        let g = &powers.pows[m];
        for i in (d - m)..width {
            let gi = &g[i + m - d];
            if !gi.is_zero() {
                rem[i] = &rem[i] - &c.scale_int(gi);
            }
        }
        poly[m] = c;
    }
    poly[0] = rem[d].clone();
    let first_nonzero = rem[d + 1..]
        .iter()
        .position(|c| !c.is_zero())
        .map(|i| (i as i64 + 1) * n);
    while poly.len() > 1 && poly.last().is_some_and(CycNum::is_zero) {
        poly.pop();
    }
    Ok(JExpression {
        poly,
        remainder_zero: first_nonzero.is_none(),
        checked_to: f.precision(),
        first_nonzero,
    })
}

/// `X^deg + Σ low[i]·X^i` with series coefficients.
#[derive(Debug, Clone)]
struct MonicSeriesPoly {
    low: Vec<QSeries>,
}

fn add_opt(acc: Option<QSeries>, t: QSeries) -> Result<Option<QSeries>> {
    Ok(Some(match acc {
        None => t,
        Some(a) => a.checked_add(&t)?,
    }))
}

fn mul_monic(a: &MonicSeriesPoly, b: &MonicSeriesPoly) -> Result<MonicSeriesPoly> {
    let (da, db) = (a.low.len(), b.low.len());
    let low = (0..da + db)
        .into_par_iter()
        .map(|i| {
            let mut acc = None;
            if i >= da {
                acc = add_opt(acc, b.low[i - da].clone())?;
            }
            if i >= db {
                acc = add_opt(acc, a.low[i - db].clone())?;
            }
            for u in i.saturating_sub(db - 1)..da.min(i + 1) {
                acc = add_opt(acc, a.low[u].checked_mul(&b.low[i - u])?)?;
            }
            Ok(acc.expect("every index receives a term"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonicSeriesPoly { low })
}

fn product_tree(f: &[MonicSeriesPoly]) -> Result<MonicSeriesPoly> {
    match f.len() {
        0 => Ok(MonicSeriesPoly { low: Vec::new() }),
        1 => Ok(f[0].clone()),
        len => {
            let (l, r) = f.split_at(len / 2);
            let (a, b) = rayon::join(|| product_tree(l), || product_tree(r));
            mul_monic(&a?, &b?)
        }
    }
}

/// Outcome of the structural checks run while building `Ψ_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiChecks {
    pub monic: bool,
    pub level_one_exponents: bool,
    pub remainders_vanish: bool,
    pub integral: bool,
    pub input_precision: i64,
    /// Smallest q-precision among the coefficients of `Ψ_k`.
    pub coefficient_precision: i64,
    /// Known coefficients past the constant term on which every remainder vanished.
    pub verified_span: i64,
    pub max_j_degree: usize,
    pub attempts: u32,
    pub offenders: Vec<String>,
}

impl PsiChecks {
    pub fn passed(&self) -> bool {
        self.monic && self.level_one_exponents && self.remainders_vanish && self.integral
    }
}

/// `Ψ_k` as a table: `table[i][d]` multiplies `X^i·j^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiPoly {
    pub level: u32,
    pub k: i64,
    pub table: Vec<Vec<CycNum>>,
    pub checks: PsiChecks,
}

/// One nonzero entry of the table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub x_power: usize,
    pub j_power: usize,
    pub value: Vec<String>,
}

/// Wire form of [`PsiPoly`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiJson {
    pub level: u32,
    pub k: i64,
    pub degree: usize,
    pub coeffs: Vec<PsiEntry>,
    pub checks: PsiChecks,
}

impl PsiPoly {
    pub fn degree(&self) -> usize {
        self.table.len() - 1
    }

    pub fn field(&self) -> Arc<CycField> {
        CycField::get(self.level).expect("valid level")
    }

    /// Coefficient of `X^i·j^d` (zero outside the table).
    pub fn coeff(&self, i: usize, d: usize) -> CycNum {
        self.table
            .get(i)
            .and_then(|row| row.get(d))
            .cloned()
            .unwrap_or_else(|| CycNum::zero(&self.field()))
    }

    pub fn max_j_degree(&self) -> usize {
        self.table.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> PsiJson {
        let mut coeffs = Vec::new();
        for (i, row) in self.table.iter().enumerate() {
            for (d, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    coeffs.push(PsiEntry {
                        x_power: i,
                        j_power: d,
                        value: c.to_strings(),
                    });
                }
            }
        }
        PsiJson {
            level: self.level,
            k: self.k,
            degree: self.degree(),
            coeffs,
            checks: self.checks.clone(),
        }
    }

    pub fn from_json(j: &PsiJson) -> Result<PsiPoly> {
        let field = CycField::get(j.level)?;
        let mut table = vec![vec![CycNum::zero(&field)]; j.degree + 1];
        for e in &j.coeffs {
            if e.x_power > j.degree {
                return Err(Error::Parse(format!("x power {} above degree {}", e.x_power, j.degree)));
            }
            let row = &mut table[e.x_power];
            if row.len() <= e.j_power {
                row.resize(e.j_power + 1, CycNum::zero(&field));
            }
            row[e.j_power] = CycNum::from_strings(&field, &e.value)?;
        }
        Ok(PsiPoly {
            level: j.level,
            k: j.k,
            table,
            checks: j.checks.clone(),
        })
    }

    /// `σ_ℓ` applied to every entry; the result belongs to `k·ℓ mod N`.
    pub fn galois(&self, l: i64) -> Result<PsiPoly> {
        let table = self
            .table
            .iter()
            .map(|row| row.iter().map(|c| c.galois(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(PsiPoly {
            level: self.level,
            k: modn(self.k * l, self.level) as i64,
            table,
            checks: self.checks.clone(),
        })
    }

    /// Same polynomial; the recorded checks are ignored.
    pub fn same_table(&self, other: &PsiPoly) -> bool {
        self.level == other.level && self.k == other.k && self.table == other.table
    }
}

/// Substitutes an exact `j`; entry `i` is the coefficient of `X^i`.
pub fn psi_specialize(psi: &PsiPoly, j: &CycNum) -> Vec<CycNum> {
    psi.table
        .iter()
        .map(|row| {
            row.iter()
                .rev()
                .fold(CycNum::zero(&psi.field()), |acc, c| &(&acc * j) + c)
        })
        .collect()
}

/// Total pole order `Σ max(0, −ord Λ_k∘A)` over `reps`, from leading exponents alone.
pub fn pole_order_sum(n: u32, k: i64, reps: &[SL2Mat]) -> Result<i64> {
    let nn = n as i128;
    let r = |x: i128| x.rem_euclid(nn) as i64;
    let mut s = 0;
    for m in reps {
        let (a, b, c, d, k) = (m.a as i128, m.b as i128, m.c as i128, m.d as i128, k as i128);
        let p1 = IndexPair::new(n, r(a), r(b))?;
        let p2 = IndexPair::new(n, r(c * k), r(d * k))?;
        let p3 = IndexPair::new(n, r(a + c * k), r(b + d * k))?;
        let (tn, _) = theta_leading(&p1, &p3)?;
        let (td, _) = theta_leading(&p2, &p3)?;
        s += (td - tn).max(0);
    }
    Ok(s)
}

/// One pass of the construction at input precision `precision`.
pub fn psi_poly_with_reps(n: u32, k: i64, reps: &[SL2Mat], precision: i64) -> Result<PsiPoly> {
    check_level(n as i64)?;
    check_coprime(k, n)?;
    let field = CycField::get(n)?;
    let cn = BigInt::from(c_constant(n as i64)?);
    let factors = reps
        .par_iter()
        .map(|m| {
            let x = lambda_composed(n, k, m, precision)?.scale_int(&cn);
            Ok(MonicSeriesPoly { low: vec![-&x] })
        })
        .collect::<Result<Vec<_>>>()?;
    let prod = product_tree(&factors)?;
    let deg = prod.low.len();
    let mut level_one = true;
    let mut offenders = Vec::new();
    let mut max_d = 0;
    let mut max_pt = 1;
    for (i, c) in prod.low.iter().enumerate() {
        match needed_degree(c) {
            Ok(d) => max_d = max_d.max(d),
            Err(_) => {
                level_one = false;
                offenders.push(format!("X^{i}: exponent not divisible by {n}"));
            }
        }
        max_pt = max_pt.max(known_qt(c));
    }
    let coefficient_precision = prod.low.iter().map(QSeries::precision).min().unwrap_or(precision);
    let mut table = vec![vec![CycNum::zero(&field)]; deg + 1];
    table[deg] = vec![CycNum::one(&field)];
    let mut remainders_vanish = level_one;
    let mut integral = true;
    if level_one {
        let powers = JPowers::new(max_d, (max_pt + max_d as i64) as usize);
        let exprs = prod
            .low
            .par_iter()
            .map(|c| express_in_j_with(c, &powers))
            .collect::<Result<Vec<_>>>()?;
        for (i, e) in exprs.into_iter().enumerate() {
            if !e.remainder_zero {
                remainders_vanish = false;
                offenders.push(format!(
                    "X^{i}: remainder nonzero at q^{}",
                    e.first_nonzero.unwrap_or(0)
                ));
            }
            for (d, c) in e.poly.iter().enumerate() {
                if !c.is_integral() {
                    integral = false;
                    offenders.push(format!("X^{i} j^{d}: {c} is not integral"));
                }
            }
            table[i] = e.poly;
        }
    }
    let checks = PsiChecks {
        monic: true,
        level_one_exponents: level_one,
        remainders_vanish,
        integral,
        input_precision: precision,
        coefficient_precision,
        verified_span: (coefficient_precision - 1).max(0),
        max_j_degree: table.iter().map(|r| r.len() - 1).max().unwrap_or(0),
        attempts: 1,
        offenders,
    };
    Ok(PsiPoly {
        level: n,
        k,
        table,
        checks,
    })
}

/// Input precision used on the first attempt: total pole order plus `9N`.
pub fn psi_start_precision(n: u32, k: i64, reps: &[SL2Mat]) -> Result<i64> {
    Ok(pole_order_sum(n, k, reps)? + 9 * n as i64)
}

/// `Ψ_k` at level N, doubling the input precision until every remainder
/// vanishes over at least `8N` known coefficients.
pub fn psi_poly(n: u32, k: i64, start: Option<i64>) -> Result<PsiPoly> {
    const MAX_ATTEMPTS: u32 = 4;
    let reps = coset_reps(n)?;
    let mut p = match start {
        Some(p) => p,
        None => psi_start_precision(n, k, &reps.reps)?,
    };
    for attempt in 1..=MAX_ATTEMPTS {
        let mut psi = psi_poly_with_reps(n, k, &reps.reps, p)?;
        psi.checks.attempts = attempt;
        let enough = psi.checks.verified_span >= 8 * n as i64;
        if !psi.checks.level_one_exponents || (psi.checks.remainders_vanish && enough) {
            return Ok(psi);
        }
        p *= 2;
    }
    Err(Error::PrecisionInsufficient(format!(
        "Ψ_{k} at level {n}: remainders did not vanish up to input precision {}",
        p / 2
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_leading_coefficients() {
        let c = j_coefficients(3);
        let want: Vec<BigInt> = [1, 744, 196884, 21493760].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(c, want);
    }

    #[test]
    fn express_examples() {
        let j = j_series(3, 10).unwrap();
        let e = express_in_j(&j).unwrap();
        let f = CycField::get(3).unwrap();
        assert_eq!(e.poly, vec![CycNum::zero(&f), CycNum::one(&f)]);
        assert!(e.remainder_zero);
        let c = QSeries::constant(CycNum::from_int(&f, 5), 30);
        assert_eq!(express_in_j(&c).unwrap().poly, vec![CycNum::from_int(&f, 5)]);
        let j2 = j.checked_mul(&j).unwrap();
        let e = express_in_j(&j2).unwrap();
        assert_eq!(e.poly, vec![CycNum::zero(&f), CycNum::zero(&f), CycNum::one(&f)]);
        assert!(e.remainder_zero);
        let bad = QSeries::from_ints(&f, 1, &[1], 9);
        assert!(matches!(express_in_j(&bad), Err(Error::NotLevelOne(1))));
    }

    #[test]
    fn level_two_sextic() {
        let psi = psi_poly(2, 1, None).unwrap();
        assert!(psi.checks.passed(), "{:?}", psi.checks);
        assert_eq!(psi.degree(), 6);
        let f = CycField::get(2).unwrap();
        // (X² − 16X + 256)³ − j·X²(X − 16)²
        let cubic: [i64; 7] = [16777216, -3145728, 393216, -28672, 1536, -48, 1];
        let jpart: [i64; 5] = [0, 0, 256, -32, 1];
        for i in 0..=6 {
            assert_eq!(psi.coeff(i, 0), CycNum::from_int(&f, cubic[i]), "X^{i}");
            let jc = if i < 5 { -jpart[i] } else { 0 };
            assert_eq!(psi.coeff(i, 1), CycNum::from_int(&f, jc), "X^{i} j");
        }
        assert_eq!(psi.max_j_degree(), 1);
    }

    #[test]
    fn json_round_trip() {
        let psi = psi_poly(2, 1, None).unwrap();
        let j = psi.to_json();
        let back = PsiPoly::from_json(&j).unwrap();
        assert!(back.same_table(&psi));
        let text = serde_json::to_string(&j).unwrap();
        let again: PsiJson = serde_json::from_str(&text).unwrap();
        assert_eq!(again, j);
    }
}
