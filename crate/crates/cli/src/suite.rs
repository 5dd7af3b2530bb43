//! Verification suites: each runs the invariants of one area at one level and
//! produces a deterministic JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use genlambda::arith::{check_level, units_mod};
use genlambda::cm::{cm_certify, CMPoint};
use genlambda::eisenstein::{e_diff_congruence, e_diff_series, e_series, e_series_uncached, theta_leading, IndexPair};
use genlambda::lambda::{
    decompose_basis, default_precision, integrality_sweep, lambda_basis, lambda_composed, lambda_k_series,
    lemma41_pair, remark34_check, BasisPair,
};
use genlambda::modpoly::psi_poly;
use genlambda::sl2::{random_sl2, SL2Mat};
use genlambda::{CycNum, Error, Result};

/// Failure records kept per check; the count is always exact.
const MAX_FAILURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Eisenstein,
    Lambda,
    Integrality,
    Psi,
    Remark34,
    Cm,
}

impl SuiteName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Eisenstein => "eisenstein",
            SuiteName::Lambda => "lambda",
            SuiteName::Integrality => "integrality",
            SuiteName::Psi => "psi",
            SuiteName::Remark34 => "remark34",
            SuiteName::Cm => "cm",
        }
    }

    pub fn default_levels(&self) -> Vec<u32> {
        match self {
            SuiteName::Eisenstein => (2..=12).collect(),
            SuiteName::Lambda => vec![3, 4, 5, 6, 7, 8],
            SuiteName::Integrality => vec![3, 4, 5, 7, 8, 9, 12],
            SuiteName::Psi => vec![2, 3],
            SuiteName::Remark34 => vec![6],
            SuiteName::Cm => vec![2, 3],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub levels: Vec<u32>,
    pub precision: Option<i64>,
    pub digits: u32,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            levels: Vec::new(),
            precision: None,
            digits: 50,
            out: PathBuf::from("reports"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub count: usize,
    pub failed: usize,
    pub failures: Vec<Value>,
}

impl Check {
    fn from_results(name: &str, results: Vec<Option<Value>>) -> Check {
        let count = results.len();
        let fails: Vec<Value> = results.into_iter().flatten().collect();
        Check {
            name: name.into(),
            passed: fails.is_empty(),
            count,
            failed: fails.len(),
            failures: fails.into_iter().take(MAX_FAILURES).collect(),
        }
    }

    fn single(name: &str, ok: bool, detail: Value) -> Check {
        Check::from_results(name, vec![(!ok).then_some(detail)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub level: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub extra: Value,
}

impl SuiteReport {
    fn new(name: SuiteName, level: u32, seed: u64, checks: Vec<Check>, extra: Value) -> SuiteReport {
        SuiteReport {
            suite: name.as_str().into(),
            level,
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
            extra,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}.json", self.suite, self.level)
    }
}

fn rng_for(seed: u64, level: u32, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((level as u64) << 32) ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn all_pairs(n: u32) -> Vec<IndexPair> {
    let mut v = Vec::new();
    for r in 0..n as i64 {
        for s in 0..n as i64 {
            if let Ok(p) = IndexPair::new(n, r, s) {
                v.push(p);
            }
        }
    }
    v
}

fn pair_pairs(n: u32) -> Vec<(IndexPair, IndexPair)> {
    let ps = all_pairs(n);
    let mut v = Vec::new();
    for a in &ps {
        for b in &ps {
            if !a.is_pm(b) {
                v.push((*a, *b));
            }
        }
    }
    v
}

fn pj(p: &IndexPair) -> Value {
    json!([p.r(), p.s()])
}

fn mj(m: &SL2Mat) -> Value {
    json!([m.a, m.b, m.c, m.d])
}

fn err_json(e: &Error) -> Value {
    json!({ "error": e.to_string() })
}

/// `Some(failure)` when `r` is an error or `Ok(false)`.
fn verdict(r: Result<bool>, ctx: Value) -> Option<Value> {
    match r {
        Ok(true) => None,
        Ok(false) => Some(ctx),
        Err(e) => Some(json!({ "input": ctx, "error": err_json(&e) })),
    }
}

/// `(series − θq^t)/(θq^(t+1))` has integral coefficients through `q^extent`.
pub fn normalized_tail_integral(p1: &IndexPair, p2: &IndexPair, extent: i64) -> Result<bool> {
    let (t, theta) = theta_leading(p1, p2)?;
    let d = e_diff_series(p1, p2, t + 2 + extent)?;
    let inv = theta.inv()?;
    let h = d.scale(&inv);
    Ok(d.order() == t && d.leading() == Some(&theta) && h.coeffs().iter().skip(1).all(CycNum::is_integral))
}

pub fn eisenstein_suite(n: u32, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let prec = cfg.precision.unwrap_or(100);
    let pairs = pair_pairs(n);
    let congr = pairs
        .par_iter()
        .map(|(a, b)| {
            let ok = (|| Ok(e_diff_series(a, b, n as i64)? == e_diff_congruence(a, b)?))();
            verdict(ok, json!({ "p1": pj(a), "p2": pj(b), "modulus": n }))
        })
        .collect();
    let tails = pairs
        .par_iter()
        .map(|(a, b)| {
            verdict(
                normalized_tail_integral(a, b, 4 * n as i64),
                json!({ "p1": pj(a), "p2": pj(b), "through": 4 * n }),
            )
        })
        .collect();
    let units = units_mod(n);
    let galois = all_pairs(n)
        .par_iter()
        .flat_map_iter(|p| units.iter().map(move |&l| (*p, l)))
        .map(|(p, l)| {
            let ok = (|| {
                let lhs = e_series(&p, prec)?.galois(l as i64)?;
                let rhs = e_series(&IndexPair::new(n, p.r() as i64, p.s() as i64 * l as i64)?, prec)?;
                Ok(lhs == rhs)
            })();
            verdict(ok, json!({ "pair": pj(&p), "l": l, "precision": prec }))
        })
        .collect();
    let mut rng = rng_for(cfg.seed, n, 1);
    let samples: Vec<(i64, i64, i64, i64)> = (0..20)
        .map(|_| {
            (
                rng.gen_range(-50..50),
                rng.gen_range(-50..50),
                rng.gen_range(-3..3),
                rng.gen_range(-3..3),
            )
        })
        .collect();
    let even = samples
        .iter()
        .filter(|(r, s, _, _)| (r.rem_euclid(n as i64), s.rem_euclid(n as i64)) != (0, 0))
        .map(|&(r, s, a, b)| {
            let ok = (|| {
                let p = IndexPair::new(n, r, s)?;
                let shifted = IndexPair::new(n, r + a * n as i64, s + b * n as i64)?;
                let base = e_series_uncached(&p, 4 * n as i64)?;
                Ok(base == e_series_uncached(&shifted, 4 * n as i64)?
                    && base == e_series_uncached(&p.neg(), 4 * n as i64)?)
            })();
            verdict(ok, json!({ "r": r, "s": s, "shift": [a, b] }))
        })
        .collect();
    let mut checks = vec![
        Check::from_results("congruence_mod_qN", congr),
        Check::from_results("leading_term_and_integral_tail", tails),
        Check::from_results("galois_action", galois),
        Check::from_results("periodicity_and_evenness", even),
    ];
    if n == 2 {
        let ok = (|| {
            let p = |r, s| IndexPair::new(2, r, s);
            let sum = e_series(&p(1, 0)?, prec)?
                .checked_add(&e_series(&p(0, 1)?, prec)?)?
                .checked_add(&e_series(&p(1, 1)?, prec)?)?;
            let four = sum.checked_add(&sum)?.checked_add(&sum)?.checked_add(&sum)?;
            Ok(four.checked_add(&genlambda::QSeries::one(sum.field(), prec))?.is_zero())
        })();
        checks.push(Check::from_results(
            "trace_identity",
            vec![verdict(ok, json!({ "precision": prec }))],
        ));
    }
    Ok(SuiteReport::new(
        SuiteName::Eisenstein,
        n,
        cfg.seed,
        checks,
        json!({ "precision": prec }),
    ))
}

/// Random element of Γ(N): a conjugate of `[[1, N], [0, 1]]` times a conjugate of its transpose.
pub fn random_gamma<R: Rng>(rng: &mut R, n: u32) -> SL2Mat {
    let t = SL2Mat::translation(n as i64);
    let lower = SL2Mat {
        a: 1,
        b: 0,
        c: n as i64,
        d: 1,
    };
    let m1 = random_sl2(rng, 3);
    let m2 = random_sl2(rng, 3);
    m1.mul(&t).mul(&m1.inverse()).mul(&m2.mul(&lower).mul(&m2.inverse()))
}

pub fn lambda_suite(n: u32, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let prec = cfg.precision.unwrap_or(100);
    let short = 4 * n as i64;
    let units = units_mod(n);
    let mut rng = rng_for(cfg.seed, n, 2);
    let pick_k = |rng: &mut ChaCha8Rng| units[rng.gen_range(0..units.len())] as i64;
    let mut samples = Vec::new();
    for _ in 0..20 {
        let k = pick_k(&mut rng);
        samples.push((k, random_sl2(&mut rng, 6), random_gamma(&mut rng, n)));
    }
    let inv: Vec<_> = samples
        .par_iter()
        .map(|(k, a, g)| {
            let ok = (|| {
                let base = lambda_composed(n, *k, a, short)?;
                Ok(base == lambda_composed(n, *k, &a.mul(g), short)?
                    && base == lambda_composed(n, *k, &a.neg(), short)?)
            })();
            verdict(ok, json!({ "k": k, "A": mj(a), "gamma": mj(g), "precision": short }))
        })
        .collect();
    let twisted: Vec<_> = samples
        .par_iter()
        .map(|(k, a, _)| {
            let ok = lemma41_pair(n, *k, a, prec).map(|(l, r)| l == r);
            verdict(ok, json!({ "k": k, "A": mj(a), "precision": prec }))
        })
        .collect();
    let mut bases = Vec::new();
    while bases.len() < 50 {
        let q1 = (rng.gen_range(0..n as i64), rng.gen_range(0..n as i64));
        let q2 = (rng.gen_range(0..n as i64), rng.gen_range(0..n as i64));
        if let Ok(b) = BasisPair::new(n, q1, q2) {
            bases.push(b);
        }
    }
    let round: Vec<_> = bases
        .par_iter()
        .map(|b| {
            let ok = (|| {
                let (k, a) = decompose_basis(b)?;
                Ok(lambda_basis(b, short)? == lambda_composed(n, k, &a, short)?)
            })();
            verdict(ok, json!({ "q1": pj(&b.q1), "q2": pj(&b.q2), "precision": short }))
        })
        .collect();
    let mut checks = vec![
        Check::from_results("gamma_and_sign_invariance", inv),
        Check::from_results("galois_twist", twisted),
        Check::from_results("basis_decomposition", round),
    ];
    if n != 6 {
        let mut outside = Vec::new();
        while outside.len() < 20 {
            let a = random_sl2(&mut rng, 6);
            if !a.in_gamma_pm(n) {
                outside.push(a);
            }
        }
        let base = lambda_k_series(n, 1, short)?;
        let non: Vec<_> = outside
            .par_iter()
            .map(|a| {
                let ok = lambda_composed(n, 1, a, short).map(|s| s != base);
                verdict(ok, json!({ "A": mj(a), "precision": short }))
            })
            .collect();
        checks.push(Check::from_results("non_invariance", non));
    }
    Ok(SuiteReport::new(
        SuiteName::Lambda,
        n,
        cfg.seed,
        checks,
        json!({ "precision": prec }),
    ))
}

pub fn integrality_suite(n: u32, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let prec = cfg.precision.unwrap_or(100);
    let reports = integrality_sweep(n, prec)?;
    let min_order = reports.iter().map(|r| r.order).min().unwrap_or(0);
    let results = reports
        .iter()
        .map(|r| (!r.passed()).then(|| serde_json::to_value(r).expect("serializable report")))
        .collect();
    let checks = vec![Check::from_results("integral_through_precision", results)];
    Ok(SuiteReport::new(
        SuiteName::Integrality,
        n,
        cfg.seed,
        checks,
        json!({ "precision": prec, "certificates": reports.len(), "min_order": min_order }),
    ))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Invariant(e.to_string()))? + "\n";
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Invariant(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Invariant(format!("{}: {e}", path.display())))
}

pub fn psi_suite(n: u32, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut files = Vec::new();
    let mut polys = Vec::new();
    for k in units_mod(n) {
        let psi = psi_poly(n, k as i64, cfg.precision)?;
        let path = cfg.out.join(format!("psi_{n}_{k}.json"));
        write_json(&path, &psi.to_json())?;
        files.push(path.file_name().unwrap().to_string_lossy().into_owned());
        checks.push(Check::single(
            &format!("psi_k{k}"),
            psi.checks.passed() && psi.checks.verified_span >= 8 * n as i64,
            serde_json::to_value(&psi.checks).expect("serializable checks"),
        ));
        polys.push(psi);
    }
    let galois = polys
        .iter()
        .flat_map(|p| units_mod(n).into_iter().map(move |l| (p, l)))
        .map(|(p, l)| {
            let ok = p
                .galois(l as i64)
                .map(|g| polys.iter().find(|q| q.k == g.k).is_some_and(|q| q.same_table(&g)));
            verdict(ok, json!({ "k": p.k, "l": l }))
        })
        .collect();
    checks.push(Check::from_results("galois_coherence", galois));
    let degree = polys.first().map(|p| p.degree()).unwrap_or(0);
    Ok(SuiteReport::new(
        SuiteName::Psi,
        n,
        cfg.seed,
        checks,
        json!({ "files": files, "degree": degree }),
    ))
}

pub fn remark34_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let prec = cfg.precision.unwrap_or(default_precision(6));
    let r = remark34_check(prec)?;
    let checks = vec![
        Check::single(
            "det_one_outside_gamma",
            r.det == 1 && r.outside_gamma,
            json!({ "matrix": mj(&r.matrix) }),
        ),
        Check::single(
            "q2_coefficient_zero",
            r.q2_coefficient_zero,
            json!({ "first_nonzero": r.first_nonzero }),
        ),
        Check::single(
            "F_vanishes",
            r.f_vanishes_to == Some(prec),
            json!({ "first_nonzero": r.first_nonzero }),
        ),
        Check::single(
            "lambda_fixed",
            r.lambda_fixed_to == Some(prec),
            json!({ "precision": prec }),
        ),
    ];
    Ok(SuiteReport::new(
        SuiteName::Remark34,
        6,
        cfg.seed,
        checks,
        json!({ "F_vanishes_to": r.f_vanishes_to, "lambda_fixed_to": r.lambda_fixed_to }),
    ))
}

/// The three classical points `i`, `(1 + √−3)/2` and `√−2`.
pub fn classical_points() -> Result<Vec<CMPoint>> {
    [-4, -3, -8].iter().map(|&d| CMPoint::from_discriminant(d)).collect()
}

pub fn cm_suite(n: u32, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let points = classical_points()?;
    let mut certs = Vec::new();
    let mut results = Vec::new();
    for k in units_mod(n) {
        let psi = psi_poly(n, k as i64, None)?;
        for p in &points {
            let c = cm_certify(n, k as i64, p, cfg.digits, Some(&psi))?;
            results.push((!c.verdict).then(|| serde_json::to_value(&c).expect("serializable certificate")));
            certs.push(c);
        }
    }
    let checks = vec![Check::from_results("psi_vanishes_at_cm_points", results)];
    Ok(SuiteReport::new(
        SuiteName::Cm,
        n,
        cfg.seed,
        checks,
        json!({ "certificates": certs }),
    ))
}

/// Runs `name` at every configured level and writes one report per level.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    let levels = if cfg.levels.is_empty() {
        name.default_levels()
    } else {
        cfg.levels.clone()
    };
    let mut out = Vec::new();
    for n in levels {
        check_level(n as i64)?;
        let report = match name {
            SuiteName::Eisenstein => eisenstein_suite(n, cfg)?,
            SuiteName::Lambda => lambda_suite(n, cfg)?,
            SuiteName::Integrality => {
                if n < 3 {
                    return Err(Error::Precondition("the integrality suite needs N ≥ 3".into()));
                }
                integrality_suite(n, cfg)?
            }
            SuiteName::Psi => psi_suite(n, cfg)?,
            SuiteName::Remark34 => {
                if n != 6 {
                    return Err(Error::Precondition("the remark34 suite runs at level 6 only".into()));
                }
                remark34_suite(cfg)?
            }
            SuiteName::Cm => cm_suite(n, cfg)?,
        };
        write_json(&cfg.out.join(report.file_name()), &report)?;
        out.push(report);
    }
    Ok(out)
}

/// One line per check, for humans.
pub fn render_table(reports: &[SuiteReport]) -> String {
    let mut s = String::new();
    for r in reports {
        for c in &r.checks {
            s.push_str(&format!(
                "{:<12} N={:<3} {:<34} {:>6}/{:<6} {}\n",
                r.suite,
                r.level,
                c.name,
                c.count - c.failed,
                c.count,
                if c.passed { "PASS" } else { "FAIL" }
            ));
        }
    }
    s
}
