//! Integer 2×2 matrices of determinant 1, lifting from SL₂(Z/N) and coset
//! representatives of SL₂(Z)/Γ(N){±1}.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{check_level, ext_gcd, gcd, modn};
use crate::error::{Error, Result};

/// `[[a, b], [c, d]]` with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SL2Mat {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2Mat {
    pub const IDENTITY: SL2Mat = SL2Mat { a: 1, b: 0, c: 0, d: 1 };
    /// `τ ↦ −1/τ`.
    pub const S: SL2Mat = SL2Mat {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<SL2Mat> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::NotSl2 {
                a,
                b,
                c,
                d,
                det: det as i64,
            });
        }
        Ok(SL2Mat { a, b, c, d })
    }

    /// Translation `τ ↦ τ + n`.
    pub fn translation(n: i64) -> SL2Mat {
        SL2Mat { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &SL2Mat) -> SL2Mat {
        SL2Mat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> SL2Mat {
        SL2Mat {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> SL2Mat {
        SL2Mat {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Entries reduced to `0..n`.
    pub fn reduce(&self, n: u32) -> [u32; 4] {
        [modn(self.a, n), modn(self.b, n), modn(self.c, n), modn(self.d, n)]
    }

    /// Membership in Γ(N).
    pub fn in_gamma(&self, n: u32) -> bool {
        self.reduce(n) == [1 % n, 0, 0, 1 % n]
    }

    /// Membership in Γ(N){±1}.
    pub fn in_gamma_pm(&self, n: u32) -> bool {
        self.in_gamma(n) || self.neg().in_gamma(n)
    }

    /// Canonical label of the class modulo Γ(N){±1}: the smaller of the reductions of `±A`.
    pub fn coset_key(&self, n: u32) -> [u32; 4] {
        self.reduce(n).min(self.neg().reduce(n))
    }

    pub fn parse(s: &str) -> Result<SL2Mat> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("bad matrix {s:?}")))?;
        match v.as_slice() {
            [a, b, c, d] => SL2Mat::new(*a, *b, *c, *d),
            _ => Err(Error::Parse(format!("expected a,b,c,d, got {s:?}"))),
        }
    }
}

impl fmt::Display for SL2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn symmetric(x: i64, n: u32) -> i64 {
    let r = modn(x, n) as i64;
    if 2 * r > n as i64 {
        r - n as i64
    } else {
        r
    }
}

/// An integer matrix of determinant 1 congruent to `[[a, b], [c, d]]` modulo `n`.
///
/// Requires `ad − bc ≡ 1 (mod n)`. Entries start from symmetric residues; the
/// bottom row is moved within its class until it is primitive, then the top
/// row is corrected by a multiple of `n`.
pub fn lift_sl2(n: u32, a: i64, b: i64, c: i64, d: i64) -> Result<SL2Mat> {
    check_level(n as i64)?;
    let nn = n as i64;
    let det = a as i128 * d as i128 - b as i128 * c as i128;
    if det.rem_euclid(nn as i128) != 1 % nn as i128 {
        return Err(Error::Precondition(format!(
            "[[{a}, {b}], [{c}, {d}]] does not have determinant 1 modulo {n}"
        )));
    }
    let (a, b) = (symmetric(a, n), symmetric(b, n));
    let mut c = symmetric(c, n);
    let d0 = symmetric(d, n);
    let mut found = None;
    'outer: for attempt in 0..2 {
        if attempt == 1 {
            if c != 0 {
                break;
            }
            c = nn;
        }
        for t in 0..4 * nn + 64 {
            for sign in [1i64, -1] {
                let d = d0 + sign * t * nn;
                if gcd(c, d) == 1 {
                    found = Some((c, d));
                    break 'outer;
                }
            }
        }
    }
    let (c, d) = found.ok_or_else(|| Error::Invariant("no primitive lift of the bottom row".into()))?;
    // x d − y c = 1
    let (_, x, y_neg) = ext_gcd(d, c);
    let y = -y_neg;
    let k = (a as i128 * d as i128 - b as i128 * c as i128 - 1) / nn as i128;
    let k = k as i64;
    let lifted = SL2Mat::new(a - k * nn * x, b - k * nn * y, c, d)?;
    debug_assert_eq!(lifted.reduce(n), SL2Mat { a, b, c, d }.reduce(n));
    Ok(lifted)
}

/// A random element of SL₂(Z) with bottom row in `[−bound, bound]²`.
pub fn random_sl2<R: rand::Rng + ?Sized>(rng: &mut R, bound: i64) -> SL2Mat {
    let bound = bound.max(1);
    loop {
        let c = rng.gen_range(-bound..=bound);
        let d = rng.gen_range(-bound..=bound);
        if gcd(c, d) != 1 {
            continue;
        }
        // a d − b c = 1
        let (_, x, y) = ext_gcd(d, c);
        let t = rng.gen_range(-bound..=bound);
        let m = SL2Mat {
            a: x + t * c,
            b: -y + t * d,
            c,
            d,
        };
        debug_assert_eq!(m.det(), 1);
        return m;
    }
}

/// Representatives of SL₂(Z)/Γ(N){±1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetReps {
    pub level: u32,
    pub reps: Vec<SL2Mat>,
}

/// `[SL₂(Z) : Γ(N){±1}]`: `N³∏(1 − p⁻²)/2` for `N > 2`, and 6 for `N = 2`.
pub fn coset_count(n: u32) -> usize {
    let full = crate::arith::factorize(n as u64)
        .iter()
        .fold(n as u64 * n as u64 * n as u64, |acc, &(p, _)| {
            acc / (p * p) * (p * p - 1)
        });
    if n == 2 {
        full as usize
    } else {
        (full / 2) as usize
    }
}

/// Enumerates SL₂(Z/N) in lexicographic order, keeps one element of each
/// `{A, −A}` and lifts it to SL₂(Z).
pub fn coset_reps(n: u32) -> Result<CosetReps> {
    check_level(n as i64)?;
    let mut reps = Vec::with_capacity(coset_count(n));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let det = (a as i64 * d as i64 - b as i64 * c as i64).rem_euclid(n as i64);
                    if det != 1 % n as i64 {
                        continue;
                    }
                    let neg = [(n - a) % n, (n - b) % n, (n - c) % n, (n - d) % n];
                    if neg < [a, b, c, d] {
                        continue;
                    }
                    reps.push(lift_sl2(n, a as i64, b as i64, c as i64, d as i64)?);
                }
            }
        }
    }
    if reps.len() != coset_count(n) {
        return Err(Error::Invariant(format!(
            "found {} cosets at level {n}, expected {}",
            reps.len(),
            coset_count(n)
        )));
    }
    Ok(CosetReps { level: n, reps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn lift_examples() {
        let a = lift_sl2(5, 0, 1, 4, 0).unwrap();
        assert_eq!(a, SL2Mat::new(0, 1, -1, 0).unwrap());
        for n in 2..=12u32 {
            for a in 0..n as i64 {
                for b in 0..n as i64 {
                    for c in 0..n as i64 {
                        for d in 0..n as i64 {
                            if (a * d - b * c).rem_euclid(n as i64) != 1 % n as i64 {
                                continue;
                            }
                            let m = lift_sl2(n, a, b, c, d).unwrap();
                            assert_eq!(m.det(), 1);
                            assert_eq!(m.reduce(n), [a as u32, b as u32, c as u32, d as u32]);
                        }
                    }
                }
            }
        }
        assert!(lift_sl2(5, 1, 0, 0, 2).is_err());
    }

    #[test]
    fn coset_counts() {
        assert_eq!(coset_reps(2).unwrap().reps.len(), 6);
        assert_eq!(coset_reps(3).unwrap().reps.len(), 12);
        assert_eq!(coset_reps(5).unwrap().reps.len(), 60);
        assert_eq!(coset_count(12), 576);
        assert_eq!(coset_count(7), 168);
    }

    #[test]
    fn cosets_are_distinct() {
        for n in 2..=9 {
            let reps = coset_reps(n).unwrap();
            let keys: HashSet<_> = reps.reps.iter().map(|m| m.coset_key(n)).collect();
            assert_eq!(keys.len(), reps.reps.len());
            assert!(reps.reps.iter().all(|m| m.det() == 1));
        }
    }

    #[test]
    fn membership() {
        let m = SL2Mat::new(3, 11, 1, 4).unwrap();
        assert!(!m.in_gamma(6));
        assert!(!m.in_gamma_pm(6));
        let g = SL2Mat::new(1, 5, 0, 1).unwrap();
        assert!(g.in_gamma(5));
        assert!(g.neg().in_gamma_pm(5));
        assert!(!g.neg().in_gamma(5));
    }

    #[test]
    fn random_elements_have_det_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            assert_eq!(random_sl2(&mut rng, 9).det(), 1);
        }
    }

    #[test]
    fn parse_and_errors() {
        assert_eq!(SL2Mat::parse("0,-1,1,0").unwrap(), SL2Mat::S);
        assert!(SL2Mat::parse("1,1,1,1").is_err());
        assert!(SL2Mat::parse("1,2").is_err());
    }
}
