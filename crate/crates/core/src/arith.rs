//! Small integer helpers shared by the exact layers.

use crate::error::{Error, Result};

/// Least non-negative residue of `x` modulo `n`.
pub fn modn(x: i64, n: u32) -> u32 {
    x.rem_euclid(n as i64) as u32
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

/// Inverse of `x` modulo `n`, as a least non-negative residue.
pub fn mod_inv(x: i64, n: u32) -> Result<u32> {
    let (g, s, _) = ext_gcd(x.rem_euclid(n as i64), n as i64);
    if g != 1 {
        return Err(Error::NotCoprime { value: x, level: n });
    }
    Ok(modn(s, n))
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u32) -> usize {
    factorize(n as u64)
        .iter()
        .fold(n as u64, |acc, &(p, _)| acc / p * (p - 1)) as usize
}

/// `Some((p, e))` when `n = p^e` with `e >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factorize(n).as_slice() {
        [single] => Some(*single),
        _ => None,
    }
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn check_level(n: i64) -> Result<u32> {
    if n < 2 || n > u32::MAX as i64 {
        return Err(Error::InvalidLevel(n));
    }
    Ok(n as u32)
}

pub fn check_coprime(k: i64, n: u32) -> Result<()> {
    if gcd(k, n as i64) != 1 {
        return Err(Error::NotCoprime { value: k, level: n });
    }
    Ok(())
}

/// Residues in `1..n` coprime to `n`.
pub fn units_mod(n: u32) -> Vec<u32> {
    (1..n).filter(|&k| gcd(k as i64, n as i64) == 1).collect()
}
