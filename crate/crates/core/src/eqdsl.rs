//! Equation systems over variables `x1..xn`: data model, text format,
//! evaluation and canonicalization.
//!
//! File format (UTF-8, LF):
//!
//! ```text
//! # optional comments
//! vars 4
//! x2 + 1 = x1
//! x3 + 1 = x2
//! x3 * x4 = x1
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One ternary equation. Indices are 1-based.
///
/// The derived `Ord` (variant first, then indices) is the total order used by
/// [`canonical_form`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Equation {
    /// `x_i + x_j = x_k`
    Sum(usize, usize, usize),
    /// `x_i * x_j = x_k`
    Product(usize, usize, usize),
    /// `x_i + 1 = x_k`
    Successor(usize, usize),
}

impl Equation {
    pub fn indices(&self) -> impl Iterator<Item = usize> {
        let (a, b, c) = match *self {
            Equation::Sum(i, j, k) | Equation::Product(i, j, k) => (i, Some(j), k),
            Equation::Successor(i, k) => (i, None, k),
        };
        std::iter::once(a).chain(b).chain(std::iter::once(c))
    }

    /// Commutative operands ordered `i <= j`.
    pub fn canonical(self) -> Self {
        match self {
            Equation::Sum(i, j, k) if i > j => Equation::Sum(j, i, k),
            Equation::Product(i, j, k) if i > j => Equation::Product(j, i, k),
            e => e,
        }
    }

    /// Applies `f` to every index.
    pub fn relabel(self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            Equation::Sum(i, j, k) => Equation::Sum(f(i), f(j), f(k)),
            Equation::Product(i, j, k) => Equation::Product(f(i), f(j), f(k)),
            Equation::Successor(i, k) => Equation::Successor(f(i), f(k)),
        }
    }

    /// Members of `E_n` are the sum and product equations.
    pub fn is_sum_or_product(&self) -> bool {
        !matches!(self, Equation::Successor(..))
    }

    pub fn holds(&self, v: &[BigInt]) -> bool {
        match *self {
            Equation::Sum(i, j, k) => &v[i - 1] + &v[j - 1] == v[k - 1],
            Equation::Product(i, j, k) => &v[i - 1] * &v[j - 1] == v[k - 1],
            Equation::Successor(i, k) => &v[i - 1] + BigInt::one() == v[k - 1],
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Equation::Sum(i, j, k) => write!(f, "x{i} + x{j} = x{k}"),
            Equation::Product(i, j, k) => write!(f, "x{i} * x{j} = x{k}"),
            Equation::Successor(i, k) => write!(f, "x{i} + 1 = x{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct System {
    pub var_count: usize,
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    VarCount,
    Index {
        equation: usize,
        index: usize,
    },
}

impl System {
    pub fn new(var_count: usize, equations: Vec<Equation>) -> Self {
        System {
            var_count,
            equations,
        }
    }

    /// Rendering on one line, equations separated by `; `.
    pub fn one_line(&self) -> String {
        let mut out = format!("vars {}", self.var_count);
        for e in &self.equations {
            out.push_str("; ");
            out.push_str(&e.to_string());
        }
        out
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_system(self))
    }
}

pub fn parse_system(text: &str) -> Result<System> {
    let mut var_count = None;
    let mut equations = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = var_count else {
            var_count = Some(parse_vars_line(&tokens, line_no)?);
            continue;
        };
        let eq = parse_equation(&tokens, line_no)?;
        for index in eq.indices() {
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange {
                    line: line_no,
                    index,
                    var_count: n,
                });
            }
        }
        equations.push(eq);
    }
    let var_count = var_count.ok_or(Error::MissingVarCount)?;
    Ok(System {
        var_count,
        equations,
    })
}

fn parse_vars_line(tokens: &[&str], line: usize) -> Result<usize> {
    match tokens {
        ["vars", n] => match n.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Syntax {
                line,
                message: format!("invalid variable count `{n}`"),
            }),
        },
        _ => Err(Error::Syntax {
            line,
            message: "expected `vars <n>`".into(),
        }),
    }
}

fn parse_var(token: &str, line: usize) -> Result<usize> {
    token
        .strip_prefix('x')
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::Syntax {
            line,
            message: format!("expected a variable like `x3`, found `{token}`"),
        })
}

fn parse_equation(tokens: &[&str], line: usize) -> Result<Equation> {
    let &[a, op, b, eq, c] = tokens else {
        return Err(Error::Syntax {
            line,
            message: "expected `x<i> (+|*) (x<j>|1) = x<k>`".into(),
        });
    };
    if eq != "=" {
        return Err(Error::Syntax {
            line,
            message: format!("expected `=`, found `{eq}`"),
        });
    }
    let i = parse_var(a, line)?;
    let k = parse_var(c, line)?;
    match (op, b) {
        ("+", "1") => Ok(Equation::Successor(i, k)),
        ("+", _) => Ok(Equation::Sum(i, parse_var(b, line)?, k)),
        ("*", _) => Ok(Equation::Product(i, parse_var(b, line)?, k)),
        _ => Err(Error::Syntax {
            line,
            message: format!("unknown operator `{op}`"),
        }),
    }
}

pub fn render_system(s: &System) -> String {
    let mut out = format!("vars {}\n", s.var_count);
    for e in &s.equations {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

pub fn validate(s: &System) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.var_count == 0 {
        out.push(Violation::VarCount);
    }
    for (n, e) in s.equations.iter().enumerate() {
        for index in e.indices() {
            if index == 0 || index > s.var_count {
                out.push(Violation::Index { equation: n, index });
            }
        }
    }
    out
}

pub fn evaluate(s: &System, tuple: &[BigInt]) -> Result<bool> {
    if tuple.len() != s.var_count {
        return Err(Error::LengthMismatch {
            expected: s.var_count,
            got: tuple.len(),
        });
    }
    Ok(s.equations.iter().all(|e| e.holds(tuple)))
}

pub fn canonical_form(s: &System) -> System {
    let mut equations: Vec<Equation> = s.equations.iter().map(|e| e.canonical()).collect();
    equations.sort();
    equations.dedup();
    System {
        var_count: s.var_count,
        equations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn parse_single_product() {
        let s = parse_system("vars 2\nx1 * x1 = x2").unwrap();
        assert_eq!(s, System::new(2, vec![Equation::Product(1, 1, 2)]));
    }

    #[test]
    fn parse_rejects_out_of_range_index() {
        let err = parse_system("vars 2\nx1 + x3 = x2").unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 3, line: 2, .. }));
    }

    #[test]
    fn parse_requires_var_count() {
        assert!(matches!(parse_system("# only a comment\n"), Err(Error::MissingVarCount)));
        assert!(matches!(
            parse_system("x1 * x1 = x2"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(parse_system("vars 0\n"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn parse_reports_syntax_line() {
        let err = parse_system("# c\nvars 3\nx1 * x2 = x3\nx1 - x2 = x3\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 4, .. }));
        assert!(parse_system("vars 2\nx1 + 2 = x2").is_err());
        assert!(parse_system("vars 2\nx1 + x2 == x2").is_err());
    }

    #[test]
    fn render_examples() {
        let s = System::new(2, vec![Equation::Product(1, 1, 2)]);
        assert_eq!(render_system(&s), "vars 2\nx1 * x1 = x2\n");
        assert_eq!(render_system(&System::new(1, vec![])), "vars 1\n");
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate(&System::new(0, vec![])), vec![Violation::VarCount]);
        assert_eq!(
            validate(&System::new(2, vec![Equation::Sum(1, 2, 3)])),
            vec![Violation::Index { equation: 0, index: 3 }]
        );
    }

    #[test]
    fn evaluate_checks_length() {
        let s = System::new(2, vec![Equation::Product(1, 1, 2)]);
        assert!(evaluate(&s, &big(&[3, 9])).unwrap());
        assert!(!evaluate(&s, &big(&[3, 8])).unwrap());
        assert!(matches!(
            evaluate(&s, &big(&[3])),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn canonical_examples() {
        let s = System::new(3, vec![Equation::Sum(2, 1, 3)]);
        assert_eq!(canonical_form(&s).equations, vec![Equation::Sum(1, 2, 3)]);
        let s = System::new(2, vec![Equation::Product(1, 1, 2), Equation::Product(1, 1, 2)]);
        assert_eq!(canonical_form(&s).equations, vec![Equation::Product(1, 1, 2)]);
    }

    fn arb_system() -> impl Strategy<Value = System> {
        (1usize..6).prop_flat_map(|n| {
            let idx = 1..=n;
            let eq = prop_oneof![
                (idx.clone(), idx.clone(), idx.clone()).prop_map(|(i, j, k)| Equation::Sum(i, j, k)),
                (idx.clone(), idx.clone(), idx.clone())
                    .prop_map(|(i, j, k)| Equation::Product(i, j, k)),
                (idx.clone(), idx).prop_map(|(i, k)| Equation::Successor(i, k)),
            ];
            prop::collection::vec(eq, 0..6).prop_map(move |eqs| System::new(n, eqs))
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(s in arb_system()) {
            prop_assert_eq!(parse_system(&render_system(&s)).unwrap(), s);
        }

        #[test]
        fn canonical_and_permutation_preserve_evaluation(
            s in arb_system(),
            vals in prop::collection::vec(-3i64..4, 6),
            seed in any::<u64>(),
        ) {
            let v = big(&vals[..s.var_count]);
            let base = evaluate(&s, &v).unwrap();
            prop_assert_eq!(evaluate(&canonical_form(&s), &v).unwrap(), base);
            let mut shuffled = s.clone();
            let len = shuffled.equations.len();
            if len > 1 {
                shuffled.equations.rotate_left((seed as usize) % len);
                shuffled.equations.swap(0, (seed as usize / 7) % len);
            }
            prop_assert_eq!(evaluate(&shuffled, &v).unwrap(), base);
        }
    }
}
