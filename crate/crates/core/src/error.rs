use thiserror::Error;

/// Errors raised by the exact and numeric layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level must be at least 2, got {0}")]
    InvalidLevel(i64),
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("{value} is not coprime to the level {level}")]
    NotCoprime { value: i64, level: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("index pair ({r}, {s}) is zero modulo {level}")]
    ZeroIndex { level: u32, r: i64, s: i64 },
    #[error("degenerate difference: {0} is congruent to plus or minus {1}")]
    DegenerateDifference(String, String),
    #[error("matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}, expected 1")]
    NotSl2 { a: i64, b: i64, c: i64, d: i64, det: i64 },
    #[error("rows {q1:?}, {q2:?} do not form a basis of (Z/{level})^2")]
    NotBasis { level: u32, q1: (i64, i64), q2: (i64, i64) },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient precision: {0}")]
    PrecisionInsufficient(String),
    #[error("series is not invariant under tau -> tau + 1: nonzero coefficient at q^{0}")]
    NotLevelOne(i64),
    #[error("integrality failure: {0}")]
    NotIntegral(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
