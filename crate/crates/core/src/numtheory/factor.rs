use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::primes::{is_prime, small_primes, TRIAL_LIMIT};
use super::table::FactorTable;
use crate::{Error, Result};

pub const DEFAULT_RHO_BUDGET: u64 = 20_000_000;

/// Prime factorization with strictly increasing primes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub factors: Vec<(BigUint, u64)>,
}

impl Factorization {
    pub fn from_map(map: BTreeMap<BigUint, u64>) -> Self {
        Factorization {
            factors: map.into_iter().filter(|(_, e)| *e > 0).collect(),
        }
    }

    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e as u32))
    }

    /// Factorization of `self^k`.
    pub fn pow(&self, k: u64) -> Self {
        Factorization {
            factors: self.factors.iter().map(|(p, e)| (p.clone(), e * k)).collect(),
        }
    }

    /// Every prime passes [`is_prime`], primes increase strictly, exponents are positive.
    pub fn is_valid(&self) -> bool {
        self.factors.windows(2).all(|w| w[0].0 < w[1].0)
            && self.factors.iter().all(|(p, e)| *e > 0 && is_prime(p))
    }
}

/// `2 * 3^2` style, `1` for the empty product.
impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factoring capability handed to the counting routines: an optional table of
/// known factorizations plus an iteration budget for Pollard rho.
#[derive(Clone, Debug)]
pub struct Factorizer {
    pub table: Option<FactorTable>,
    pub rho_budget: u64,
}

impl Default for Factorizer {
    fn default() -> Self {
        Factorizer {
            table: None,
            rho_budget: DEFAULT_RHO_BUDGET,
        }
    }
}

impl Factorizer {
    pub fn new(table: Option<FactorTable>, rho_budget: u64) -> Self {
        Factorizer { table, rho_budget }
    }

    pub fn factorize(&self, n: &BigUint) -> Result<Factorization> {
        factorize(n, self.table.as_ref(), self.rho_budget)
    }
}

/// `Some((root, k))` with `k >= 2` prime when `n = root^k`. Only roots above
/// the trial-division limit are considered.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u64)> {
    let bits = n.bits();
    let min_root_bits = 64 - (TRIAL_LIMIT as u64).leading_zeros() as u64 - 1;
    for &k in small_primes() {
        let k = k as u64;
        if k * min_root_bits > bits {
            break;
        }
        let r = n.nth_root(k as u32);
        if &r.pow(k as u32) == n {
            return Some((r, k));
        }
    }
    None
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's cycle finding on `x^2 + c mod n`. Charges every iteration to `budget`.
fn rho_u64(n: u64, budget: &mut u64) -> Option<u64> {
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    for c in 1..u64::MAX {
        let f = |x: u64| ((mul(x, x) as u128 + c as u128) % n as u128) as u64;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = f(y);
                    q = mul(q, x.abs_diff(y));
                }
                *budget = budget.checked_sub(m)?;
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn rho_big(n: &BigUint, budget: &mut u64) -> Option<BigUint> {
    let one = BigUint::one();
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let (mut r, mut q, mut g) = (1u64, BigUint::one(), BigUint::one());
        let mut x = y.clone();
        let mut ys = y.clone();
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                *budget = budget.checked_sub(m)?;
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}

/// Complete factorization of `n >= 1`: trial division, then for each
/// remaining cofactor a table lookup, a perfect-power check, a primality test
/// and Pollard-Brent rho. Fails with the partial result if the rho budget
/// runs out on a composite.
pub fn factorize(n: &BigUint, table: Option<&FactorTable>, rho_budget: u64) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Precondition("cannot factor 0".into()));
    }
    let mut found: BTreeMap<BigUint, u64> = BTreeMap::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        let p = BigUint::from(p);
        if &p * &p > rest {
            break;
        }
        let mut e = 0;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            found.insert(p, e);
        }
    }

    let mut budget = rho_budget;
    let mut pending: Vec<(BigUint, u64)> = Vec::new();
    if !rest.is_one() {
        pending.push((rest, 1));
    }
    let mut stuck = Vec::new();
    while let Some((c, mult)) = pending.pop() {
        if c.is_one() {
            continue;
        }
        if let Some(known) = table.and_then(|t| t.get(&c)) {
            for (p, e) in &known.factors {
                *found.entry(p.clone()).or_insert(0) += e * mult;
            }
            continue;
        }
        if let Some((root, k)) = perfect_power(&c) {
            pending.push((root, mult * k));
            continue;
        }
        if is_prime(&c) {
            *found.entry(c).or_insert(0) += mult;
            continue;
        }
        if let Some(p) = table.and_then(|t| t.prime_dividing(&c)) {
            let mut c = c;
            let mut e = 0;
            while c.is_multiple_of(p) {
                c /= p;
                e += 1;
            }
            *found.entry(p.clone()).or_insert(0) += e * mult;
            pending.push((c, mult));
            continue;
        }
        let split = match c.to_u64() {
            Some(small) => rho_u64(small, &mut budget).map(BigUint::from),
            None => rho_big(&c, &mut budget),
        };
        match split {
            Some(d) => {
                let other = &c / &d;
                pending.push((d, mult));
                pending.push((other, mult));
            }
            None => stuck.push(c),
        }
    }
    let partial = Factorization::from_map(found);
    if stuck.is_empty() {
        Ok(partial)
    } else {
        stuck.sort();
        Err(Error::FactorizationIncomplete {
            partial,
            cofactors: stuck,
        })
    }
}

/// The `(2-adic valuation, odd part)` of a positive integer.
pub fn split_two(n: &BigUint) -> (u64, BigUint) {
    match n.trailing_zeros() {
        Some(z) => (z, n >> z),
        None => (0, BigUint::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fac(n: &BigUint) -> Factorization {
        factorize(n, None, DEFAULT_RHO_BUDGET).unwrap()
    }

    #[test]
    fn small_values() {
        assert_eq!(fac(&BigUint::from(18u32)).to_string(), "2 * 3^2");
        assert_eq!(fac(&BigUint::one()).to_string(), "1");
        assert!(factorize(&BigUint::zero(), None, 10).is_err());
        for n in 1..3000u32 {
            let f = fac(&BigUint::from(n));
            assert_eq!(f.value(), BigUint::from(n));
            assert!(f.is_valid());
        }
    }

    #[test]
    fn two_to_63_plus_one() {
        let n = (BigUint::one() << 63) + 1u32;
        let f = fac(&n);
        assert_eq!(f.to_string(), "3^3 * 19 * 43 * 5419 * 77158673929");
        assert_eq!(f.value(), n);
    }

    #[test]
    fn two_to_127_plus_one() {
        let n = (BigUint::one() << 127) + 1u32;
        let f = fac(&n);
        assert_eq!(f.factors.len(), 2);
        assert_eq!(f.factors[0], (BigUint::from(3u32), 1));
        assert_eq!(f.factors[1].0, &n / 3u32);
    }

    #[test]
    fn rho_splits_semiprimes() {
        // 2^59 - 1 = 179951 * 3203431780337
        let n = (BigUint::one() << 59) - 1u32;
        assert_eq!(fac(&n).to_string(), "179951 * 3203431780337");
        // above 2^64: 2^67 - 1 = 193707721 * 761838257287
        let n = (BigUint::one() << 67) - 1u32;
        assert_eq!(fac(&n).to_string(), "193707721 * 761838257287");
    }

    #[test]
    fn perfect_powers_are_unwrapped() {
        let p = BigUint::from(1_000_003u32);
        let n = p.pow(40) * BigUint::from(12u32);
        let f = fac(&n);
        assert_eq!(f.to_string(), "2^2 * 3 * 1000003^40");
    }

    #[test]
    fn exhausted_budget_reports_partial() {
        // 2^67 - 1 needs more than a handful of rho iterations
        let n = ((BigUint::one() << 67) - 1u32) * 10u32;
        match factorize(&n, None, 100) {
            Err(Error::FactorizationIncomplete { partial, cofactors }) => {
                assert_eq!(partial.to_string(), "2 * 5");
                assert_eq!(cofactors, vec![(BigUint::one() << 67) - 1u32]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
