//! Externally supplied factorizations.
//!
//! One entry per line, `#` starts a comment:
//!
//! ```text
//! 18 : 2 * 3^2
//! 9223372036854775809 : 3^3 * 19 * 43 * 5419 * 77158673929
//! ```
//!
//! Every prime is re-tested and every product recomputed on load.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use num_bigint::BigUint;
use num_integer::Integer;

use super::factor::Factorization;
use super::primes::is_prime;
use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct FactorTable {
    entries: HashMap<BigUint, Factorization>,
    primes: BTreeSet<BigUint>,
}

impl FactorTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: &BigUint) -> Option<&Factorization> {
        self.entries.get(n)
    }

    /// Some prime listed anywhere in the table that divides `n`.
    pub fn prime_dividing(&self, n: &BigUint) -> Option<&BigUint> {
        self.primes.iter().find(|p| n.is_multiple_of(p))
    }

    pub fn insert(&mut self, n: BigUint, f: Factorization) {
        self.primes.extend(f.factors.iter().map(|(p, _)| p.clone()));
        self.entries.insert(n, f);
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::FactorTable {
        line,
        message: message.into(),
    }
}

fn parse_number(s: &str, line: usize) -> Result<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(line, format!("expected a decimal number, found `{s}`")));
    }
    Ok(s.parse().expect("digits"))
}

pub fn parse_factor_table(text: &str) -> Result<FactorTable> {
    let mut table = FactorTable::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, rhs) = content
            .split_once(':')
            .ok_or_else(|| bad(line, "expected `<N> : <p1>[^<e1>] * ...`"))?;
        let n = parse_number(lhs.trim(), line)?;
        let mut map: BTreeMap<BigUint, u64> = BTreeMap::new();
        for factor in rhs.split('*') {
            let factor = factor.trim();
            let (p, e) = match factor.split_once('^') {
                Some((p, e)) => {
                    let e: u64 = e
                        .trim()
                        .parse()
                        .ok()
                        .filter(|&e| e > 0)
                        .ok_or_else(|| bad(line, format!("bad exponent in `{factor}`")))?;
                    (parse_number(p.trim(), line)?, e)
                }
                None => (parse_number(factor, line)?, 1),
            };
            if !is_prime(&p) {
                return Err(bad(line, format!("{p} is not prime (entry {n})")));
            }
            *map.entry(p).or_insert(0) += e;
        }
        let f = Factorization::from_map(map);
        if f.value() != n {
            return Err(bad(line, format!("product {} does not equal {n}", f.value())));
        }
        table.insert(n, f);
    }
    Ok(table)
}

pub fn load_factor_table(path: impl AsRef<Path>) -> Result<FactorTable> {
    parse_factor_table(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let t = parse_factor_table("# header\n6 : 2 * 3\n18 : 2 * 3^2  # trailing\n\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(&BigUint::from(6u32)).unwrap().to_string(), "2 * 3");
        assert_eq!(t.get(&BigUint::from(18u32)).unwrap().to_string(), "2 * 3^2");
    }

    #[test]
    fn rejects_wrong_product() {
        let err = parse_factor_table("6 : 2 * 3\n15 : 3 * 7\n").unwrap_err();
        assert!(matches!(err, Error::FactorTable { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("15"));
    }

    #[test]
    fn rejects_composite_factor() {
        let err = parse_factor_table("16 : 4^2\n").unwrap_err();
        assert!(err.to_string().contains("not prime"));
        assert!(parse_factor_table("16 2^4\n").is_err());
        assert!(parse_factor_table("16 : 2^x\n").is_err());
    }
}
