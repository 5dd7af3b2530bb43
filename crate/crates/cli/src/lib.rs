//! Command implementations behind the `genlambda` binary.

pub mod suite;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use genlambda::arith::check_level;
use genlambda::cm::{cm_certify, CMPoint};
use genlambda::eisenstein::{e_series, IndexPair};
use genlambda::lambda::{
    default_precision, integrality_sweep, lambda_basis, lambda_composed, lambda_k_series, remark34_check, BasisPair,
};
use genlambda::modpoly::{psi_poly, PsiJson, PsiPoly};
use genlambda::sl2::SL2Mat;
use genlambda::{Error, Result};

pub use suite::{run_suite, SuiteConfig, SuiteName, SuiteReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

/// Exit status for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionInsufficient(_) => EXIT_PRECISION,
        Error::InvalidLevel(_)
        | Error::LevelMismatch(..)
        | Error::NotCoprime { .. }
        | Error::ZeroIndex { .. }
        | Error::DegenerateDifference(..)
        | Error::NotSl2 { .. }
        | Error::NotBasis { .. }
        | Error::Precondition(_)
        | Error::NotLevelOne(_)
        | Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

/// Settings read from a `--config` JSON file. Command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub level: Option<u32>,
    pub levels: Option<Vec<u32>>,
    pub prec: Option<i64>,
    pub digits: Option<u32>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Effective global settings after merging flags over the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub level: Option<u32>,
    pub levels: Vec<u32>,
    pub prec: Option<i64>,
    pub digits: u32,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn merge(flags: FileConfig, file: FileConfig) -> Settings {
        Settings {
            level: flags.level.or(file.level),
            levels: flags
                .levels
                .filter(|v| !v.is_empty())
                .or(file.levels)
                .unwrap_or_default(),
            prec: flags.prec.or(file.prec),
            digits: flags.digits.or(file.digits).unwrap_or(50),
            jobs: flags.jobs.or(file.jobs),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.or(file.out),
        }
    }

    pub fn require_level(&self) -> Result<u32> {
        let n = self
            .level
            .ok_or_else(|| Error::Precondition("--level is required".into()))?;
        check_level(n as i64)?;
        Ok(n)
    }

    pub fn precision_or(&self, default: i64) -> Result<i64> {
        let p = self.prec.unwrap_or(default);
        if p < 1 {
            return Err(Error::Precondition(format!("precision must be positive, got {p}")));
        }
        Ok(p)
    }
}

/// What a command produced: a JSON document, a human rendering, and a verdict.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn json_only(json: Value, passed: bool) -> Outcome {
        let text = serde_json::to_string_pretty(&json).unwrap_or_default();
        Outcome { json, text, passed }
    }
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("serializable value")
}

fn parse_pair(s: &str) -> Result<(i64, i64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|_| Error::Parse(format!("bad integer '{a}'")))?,
            b.parse().map_err(|_| Error::Parse(format!("bad integer '{b}'")))?,
        )),
        _ => Err(Error::Parse(format!("expected 'a,b', got '{s}'"))),
    }
}

pub fn cmd_eseries(st: &Settings, pair: &str) -> Result<Outcome> {
    let n = st.require_level()?;
    let p = IndexPair::parse(n, pair)?;
    let prec = st.precision_or(default_precision(n))?;
    let s = e_series(&p, prec)?;
    Ok(Outcome {
        json: to_value(&s.to_json()),
        text: s.to_string(),
        passed: true,
    })
}

pub fn cmd_lambda(
    st: &Settings,
    k: Option<i64>,
    matrix: Option<&str>,
    q1: Option<&str>,
    q2: Option<&str>,
) -> Result<Outcome> {
    let n = st.require_level()?;
    let prec = st.precision_or(default_precision(n))?;
    let s = match (matrix, q1, q2) {
        (_, Some(a), Some(b)) => {
            if matrix.is_some() || k.is_some() {
                return Err(Error::Precondition("--q1/--q2 exclude --k and --matrix".into()));
            }
            lambda_basis(&BasisPair::new(n, parse_pair(a)?, parse_pair(b)?)?, prec)?
        }
        (_, Some(_), None) | (_, None, Some(_)) => {
            return Err(Error::Precondition("--q1 and --q2 go together".into()));
        }
        (Some(m), None, None) => lambda_composed(n, k.unwrap_or(1), &SL2Mat::parse(m)?, prec)?,
        (None, None, None) => lambda_k_series(n, k.unwrap_or(1), prec)?,
    };
    Ok(Outcome {
        json: to_value(&s.to_json()),
        text: s.to_string(),
        passed: true,
    })
}

pub fn cmd_certify_integrality(st: &Settings) -> Result<Outcome> {
    let n = st.require_level()?;
    if n < 3 {
        return Err(Error::Precondition("integrality certificates need N ≥ 3".into()));
    }
    let prec = st.precision_or(100)?;
    let reports = integrality_sweep(n, prec)?;
    let passed = reports.iter().all(|r| r.passed());
    let text = format!(
        "N={n} precision={prec}: {}/{} certificates pass",
        reports.iter().filter(|r| r.passed()).count(),
        reports.len()
    );
    Ok(Outcome {
        json: json!({ "level": n, "precision": prec, "passed": passed, "reports": reports }),
        text,
        passed,
    })
}

pub fn cmd_certify_remark34(st: &Settings) -> Result<Outcome> {
    let prec = st.precision_or(200)?;
    let r = remark34_check(prec)?;
    let mut json = to_value(&r);
    json["F_vanishes_to"] = to_value(&r.f_vanishes_to);
    Ok(Outcome::json_only(json, r.passed))
}

pub fn cmd_psi(st: &Settings, k: i64) -> Result<Outcome> {
    let n = st.require_level()?;
    let psi = psi_poly(n, k, st.prec)?;
    let passed = psi.checks.passed();
    let json = to_value(&psi.to_json());
    if let Some(out) = &st.out {
        let path = if out.extension().is_some_and(|e| e == "json") {
            out.clone()
        } else {
            out.join(format!("psi_{n}_{}.json", psi.k))
        };
        write_file(&path, &json)?;
    }
    Ok(Outcome::json_only(json, passed))
}

pub fn load_psi(path: &Path) -> Result<PsiPoly> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let j: PsiJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    PsiPoly::from_json(&j)
}

pub fn cmd_cm(st: &Settings, k: i64, theta: Option<&str>, disc: Option<i64>, psi: Option<&Path>) -> Result<Outcome> {
    let n = st.require_level()?;
    let point = match (theta, disc) {
        (Some(t), None) => CMPoint::parse(t)?,
        (None, Some(d)) => CMPoint::from_discriminant(d)?,
        _ => return Err(Error::Precondition("give exactly one of --theta and --disc".into())),
    };
    let loaded = psi.map(load_psi).transpose()?;
    if let Some(p) = &loaded {
        if p.level != n || p.k != k.rem_euclid(n as i64) {
            return Err(Error::Precondition(format!(
                "Ψ file is for N={} k={}, not N={n} k={k}",
                p.level, p.k
            )));
        }
    }
    let cert = cm_certify(n, k, &point, st.digits, loaded.as_ref())?;
    Ok(Outcome::json_only(to_value(&cert), cert.verdict))
}

pub fn cmd_suite(st: &Settings, name: SuiteName) -> Result<Outcome> {
    let mut levels = st.levels.clone();
    if levels.is_empty() {
        levels.extend(st.level);
    }
    let cfg = SuiteConfig {
        levels,
        precision: st.prec,
        digits: st.digits,
        out: st.out.clone().unwrap_or_else(|| PathBuf::from("reports")),
        seed: st.seed,
    };
    let reports = run_suite(name, &cfg)?;
    let passed = reports.iter().all(|r| r.passed);
    Ok(Outcome {
        json: to_value(&reports),
        text: suite::render_table(&reports),
        passed,
    })
}

pub fn write_file(path: &Path, v: &Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Invariant(format!("{}: {e}", dir.display())))?;
    }
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Invariant(e.to_string()))? + "\n";
    fs::write(path, text).map_err(|e| Error::Invariant(format!("{}: {e}", path.display())))
}
