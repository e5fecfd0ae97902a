//! Exact multinomial sums over compositions.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `N!/(k₁!…k_m!)` for positive parts summing to `N ≤ 64`.
pub fn multinomial(n: u32, parts: &[u32]) -> Result<BigUint> {
    if n > 64 {
        return Err(Error::Domain(format!("multinomial needs N ≤ 64, got {n}")));
    }
    if parts.contains(&0) {
        return Err(Error::Domain("multinomial parts must be positive".into()));
    }
    let sum: u32 = parts.iter().sum();
    if sum != n {
        return Err(Error::Domain(format!("parts sum to {sum}, expected {n}")));
    }
    let den = parts.iter().fold(BigUint::one(), |acc, &k| acc * factorial(k));
    Ok(factorial(n) / den)
}

/// All ordered compositions of `n` into positive parts.
pub fn compositions(n: u32) -> Vec<Vec<u32>> {
    fn rec(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            rec(rest - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, &mut Vec::new(), &mut out);
    }
    out
}

/// `Σ_m ((−1)^{m−1}/m) Σ_{k₁+…+k_m=N} multinomial · weight(k)`.
fn weighted_sum(n: u32, weight: impl Fn(&[u32]) -> BigInt) -> Result<BigRational> {
    if !(1..=16).contains(&n) {
        return Err(Error::Domain(format!("N must lie in 1..=16, got {n}")));
    }
    let mut total = BigRational::zero();
    for parts in compositions(n) {
        let m = parts.len() as i64;
        let c = BigInt::from(multinomial(n, &parts)?) * weight(&parts);
        let sign = if m % 2 == 1 { 1 } else { -1 };
        total += BigRational::new(c * sign, BigInt::from(m));
    }
    Ok(total)
}

/// `a_N = Σ_m ((−1)^{m−1}/m) Σ_{k₁+…+k_m=N} N!/(k₁!…k_m!)`.
pub fn identity_a(n: u32) -> Result<BigRational> {
    weighted_sum(n, |_| BigInt::one())
}

/// `b_N`, the same sum weighted by `Σ_{i≠j} k_i k_j` over ordered pairs.
pub fn identity_b(n: u32) -> Result<BigRational> {
    weighted_sum(n, |k| {
        let s: u64 = k.iter().map(|&x| x as u64).sum();
        let sq: u64 = k.iter().map(|&x| (x as u64) * (x as u64)).sum();
        BigInt::from(s * s - sq)
    })
}
