//! Divisor sums and counts of representations as sums of squares.
//!
//! `r_k(n)` counts ordered, signed `k`-tuples of integers whose squares sum to
//! `n`. The closed forms here (Jacobi for `r_4`, the multiplicative formula
//! for `r_3` of a perfect square) are checked in the tests against
//! [`rk_bruteforce`], which only counts.

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::factor::{split_two, Factorization, Factorizer};
use crate::{Error, Result};

/// Largest `n` accepted by [`rk_bruteforce`] for `k <= 4`.
pub const RK_LIMIT_SMALL_K: u64 = 10_000_000;
/// Largest `n` accepted by [`rk_bruteforce`] for `k > 4`.
pub const RK_LIMIT_LARGE_K: u64 = 100_000;

pub fn sigma(f: &Factorization) -> BigUint {
    f.factors.iter().fold(BigUint::one(), |acc, (p, a)| {
        acc * ((p.pow(*a as u32 + 1) - 1u32) / (p - 1u32))
    })
}

/// `r_4` by Jacobi's four-square theorem.
pub fn r4(n: &BigUint, oracle: &Factorizer) -> Result<BigUint> {
    if n.is_zero() {
        return Ok(BigUint::one());
    }
    let (twos, odd) = split_two(n);
    let s = sigma(&oracle.factorize(&odd)?);
    Ok(if twos == 0 { s * 8u32 } else { s * 24u32 })
}

fn weight(x: u64) -> u64 {
    if x == 0 {
        1
    } else {
        2
    }
}

fn exact_sqrt(m: u64) -> Option<u64> {
    let r = m.sqrt();
    (r * r == m).then_some(r)
}

fn r2_direct(m: u64) -> u64 {
    let mut total = 0;
    let mut x = 0u64;
    while x * x <= m {
        if let Some(y) = exact_sqrt(m - x * x) {
            total += weight(x) * weight(y);
        }
        x += 1;
    }
    total
}

/// `r_k(m)` for every `m <= n_max`, by repeated convolution with the squares.
pub fn rk_table(k: u32, n_max: u64) -> Vec<u64> {
    let len = n_max as usize + 1;
    let mut cur = vec![0u64; len];
    cur[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u64; len];
        let mut x = 0usize;
        while x * x < len {
            let (sq, w) = (x * x, weight(x as u64));
            for m in sq..len {
                next[m] += w * cur[m - sq];
            }
            x += 1;
        }
        cur = next;
    }
    cur
}

/// Exact `r_k(n)` by enumeration, `1 <= k <= 8`.
pub fn rk_bruteforce(k: u32, n: u64) -> Result<BigUint> {
    let limit = if k <= 4 { RK_LIMIT_SMALL_K } else { RK_LIMIT_LARGE_K };
    rk_bruteforce_with_limit(k, n, limit)
}

pub fn rk_bruteforce_with_limit(k: u32, n: u64, limit: u64) -> Result<BigUint> {
    if !(1..=8).contains(&k) {
        return Err(Error::Precondition(format!("k must be in [1, 8], got {k}")));
    }
    if n > limit {
        return Err(Error::Precondition(format!(
            "r_{k}({n}) exceeds the enumeration limit {limit}"
        )));
    }
    let count = match k {
        1 => exact_sqrt(n).map_or(0, weight),
        2 => r2_direct(n),
        3 => {
            let mut total = 0;
            let mut x = 0u64;
            while x * x <= n {
                total += weight(x) * r2_direct(n - x * x);
                x += 1;
            }
            total
        }
        4 => {
            let r2 = rk_table(2, n);
            (0..=n as usize).map(|m| r2[m] * r2[n as usize - m]).sum()
        }
        _ => rk_table(k, n)[n as usize],
    };
    Ok(BigUint::from(count))
}

/// `r_3(u^2)` for odd `u` given by its factorization:
/// `6 * prod (sigma(p^a) - chi(p) * sigma(p^(a-1)))` with `chi(p) = +1` iff
/// `p = 1 mod 4`. A factor 2 in `u` is ignored since `r_3(4m) = r_3(m)`.
pub fn r3_odd_square(root: &Factorization) -> BigUint {
    let mut acc = BigInt::from(6);
    for (p, a) in &root.factors {
        if *p == BigUint::from(2u32) {
            continue;
        }
        let p = BigInt::from(p.clone());
        let pa = p.pow(*a as u32);
        let top = &pa * &p - 1;
        let lower = &pa - 1;
        let chi_plus = (&p % 4) == BigInt::one();
        let term = if chi_plus { top - lower } else { top + lower } / (&p - 1);
        acc *= term;
    }
    acc.to_biguint().expect("positive")
}

/// Exact `r_3(n)`: factors of 4 are stripped, residues `7 mod 8` give 0,
/// small values are enumerated, odd perfect squares use [`r3_odd_square`].
pub fn r3_exact(n: &BigUint, oracle: &Factorizer) -> Result<BigUint> {
    if n.is_zero() {
        return Ok(BigUint::one());
    }
    let (twos, odd) = split_two(n);
    let m = odd << (twos % 2);
    if (&m % 8u32) == BigUint::from(7u32) {
        return Ok(BigUint::zero());
    }
    if let Some(small) = m.to_u64().filter(|&v| v <= RK_LIMIT_SMALL_K) {
        return rk_bruteforce(3, small);
    }
    if m.is_odd() {
        let root = m.sqrt();
        if &root * &root == m {
            return Ok(r3_odd_square(&oracle.factorize(&root)?));
        }
    }
    Err(Error::UnsupportedShape(m))
}

/// `r_3(base^exp)`, factoring only `|base|` when `exp` is even.
pub fn r3_of_power(base: &BigInt, exp: u64, oracle: &Factorizer) -> Result<BigUint> {
    if base.is_zero() {
        return Ok(if exp == 0 { BigUint::from(6u32) } else { BigUint::one() });
    }
    if exp % 2 == 1 {
        let value = base.abs().to_biguint().expect("abs").pow(exp as u32);
        return r3_exact(&value, oracle);
    }
    let (_, odd) = split_two(&base.abs().to_biguint().expect("abs"));
    if odd.is_one() {
        return Ok(BigUint::from(6u32));
    }
    Ok(r3_odd_square(&oracle.factorize(&odd)?.pow(exp / 2)))
}
