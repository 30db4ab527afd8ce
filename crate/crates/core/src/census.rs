//! Exact solution counts for `B_n` and `T_n`, the `t_n / b_n` table, heights
//! of rational tuples, and the height-bound check for `S_n`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::boxsolver::{annulus_empty, solve_box, SearchBox, SolveOptions};
use crate::families::gen_s;
use crate::numtheory::{decimal_approx, r3_of_power, sigma, Factorizer};
use crate::{Error, Result};

/// `2^(2^e)`
fn tower(e: usize) -> BigUint {
    BigUint::one() << (1usize << e)
}

/// Number of integer solutions of `B_n`: `1 + 8 * sigma(2 + 2^(2^(n-12)))`.
pub fn b_count(n: usize, oracle: &Factorizer) -> Result<BigUint> {
    if n < 13 {
        return Err(Error::Precondition(format!("b_n needs n >= 13, got {n}")));
    }
    let m = tower(n - 12) + 2u32;
    Ok(sigma(&oracle.factorize(&m)?) * 8u32 + 1u32)
}

/// The possible values of `x_1` in a nonzero solution of `T_n`:
/// `2 + 2^k, 2 - 2^k` for `k = 0..=2^(n-12)`.
pub fn t_candidates(n: usize) -> Result<Vec<BigInt>> {
    if n < 12 {
        return Err(Error::Precondition(format!("T_n needs n >= 12, got {n}")));
    }
    let two = BigInt::from(2);
    Ok((0..=(1usize << (n - 12)))
        .flat_map(|k| {
            let p = BigInt::one() << k;
            [&two + &p, &two - p]
        })
        .collect())
}

/// Number of integer solutions of `T_n`: one for the zero solution plus
/// `r_3(c^(2^(n-12)))` for every candidate `c`.
pub fn t_count(n: usize, oracle: &Factorizer) -> Result<BigUint> {
    let exp = 1u64 << (n.saturating_sub(12));
    let mut total = BigUint::one();
    for c in t_candidates(n)? {
        match r3_of_power(&c, exp, oracle) {
            Ok(r) => total += r,
            Err(Error::UnsupportedShape(v)) => {
                assert_eq!(exp, 1, "even exponents always give perfect squares");
                return Err(Error::UnsupportedShape(v));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

/// `2 + 2^(2^(n-12))`, the largest absolute coordinate of a solution of `B_n`.
pub fn b_height_bound(n: usize) -> Result<BigUint> {
    if n < 13 {
        return Err(Error::Precondition(format!("B_n needs n >= 13, got {n}")));
    }
    Ok(tower(n - 12) + 2u32)
}

/// `(2 + 2^(2^(n-12)))^(2^(n-12))`, the largest absolute coordinate of a
/// solution of `T_n`.
pub fn t_height_bound(n: usize) -> Result<BigUint> {
    if n < 12 {
        return Err(Error::Precondition(format!("T_n needs n >= 12, got {n}")));
    }
    Ok((tower(n - 12) + 2u32).pow(1u32 << (n - 12)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub t_n: Option<BigUint>,
    pub b_n: Option<BigUint>,
    pub approx: Option<String>,
    /// Set when a factorization could not be completed.
    pub error: Option<String>,
}

impl RatioRow {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }

    /// `Some(true)` iff `t_n > b_n`, compared exactly.
    pub fn t_exceeds_b(&self) -> Option<bool> {
        Some(self.t_n.as_ref()? > self.b_n.as_ref()?)
    }
}

impl fmt::Display for RatioRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn show<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "?".to_string(), T::to_string)
        }
        write!(
            f,
            "n={} t={} b={} ratio≈{}",
            self.n,
            show(&self.t_n),
            show(&self.b_n),
            show(&self.approx)
        )?;
        if !self.is_complete() {
            f.write_str(" INCOMPLETE")?;
        }
        Ok(())
    }
}

fn ratio_row(n: usize, digits: u32, oracle: &Factorizer) -> RatioRow {
    let t = t_count(n, oracle);
    let b = b_count(n, oracle);
    let approx = match (&t, &b) {
        (Ok(t), Ok(b)) => Some(decimal_approx(t, b, digits)),
        _ => None,
    };
    let error = [&t, &b]
        .into_iter()
        .find_map(|r| r.as_ref().err().map(ToString::to_string));
    RatioRow {
        n,
        t_n: t.ok(),
        b_n: b.ok(),
        approx,
        error,
    }
}

/// One row per `n` in `from..=to`, ascending. Rows whose factorizations fail
/// are flagged instead of aborting the table.
pub fn ratio_table(from: usize, to: usize, digits: u32, oracle: &Factorizer) -> Result<Vec<RatioRow>> {
    if from < 13 || from > to {
        return Err(Error::Precondition(format!(
            "ratio table needs 13 <= from <= to, got {from}..{to}"
        )));
    }
    if digits == 0 {
        return Err(Error::Precondition("digits must be at least 1".into()));
    }
    Ok((from..=to)
        .into_par_iter()
        .map(|n| ratio_row(n, digits, oracle))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct T20Report {
    /// `r_3((2 + 2^256)^256)`, a lower bound for `t_20 - 1`.
    pub r3_term: BigUint,
    pub b_20: BigUint,
    pub approx: String,
    pub exceeds_threshold: bool,
}

impl fmt::Display for T20Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "b20={}", self.b_20)?;
        writeln!(f, "r3 term digits={}", self.r3_term.to_string().len())?;
        writeln!(f, "t20/b20 > r3((2+2^256)^256)/b20 ≈ {}", self.approx)?;
        writeln!(f, "exceeds 2.75e9748: {}", self.exceeds_threshold)
    }
}

/// Exact lower bound `r_3((2 + 2^256)^256) / b_20` for `t_20 / b_20`,
/// compared against `2.75 * 10^9748`. Needs the factorization of `2^255 + 1`.
pub fn t20_check(oracle: &Factorizer) -> Result<T20Report> {
    let base = BigInt::from(tower(8) + 2u32);
    let r3_term = r3_of_power(&base, 256, oracle)?;
    let b_20 = b_count(20, oracle)?;
    let threshold = &b_20 * BigUint::from(275u32) * BigUint::from(10u32).pow(9746);
    Ok(T20Report {
        approx: decimal_approx(&r3_term, &b_20, 6),
        exceeds_threshold: r3_term > threshold,
        r3_term,
        b_20,
    })
}

/// A rational number in lowest terms with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalValue {
    numerator: BigInt,
    denominator: BigUint,
}

impl RationalValue {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        let g = numerator.gcd(&denominator);
        let sign = if denominator.is_negative() { -BigInt::one() } else { BigInt::one() };
        let numerator = &numerator / &g * &sign;
        let denominator = (denominator / g * sign).to_biguint().expect("positive");
        Ok(RationalValue {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }
}

impl From<BigInt> for RationalValue {
    fn from(v: BigInt) -> Self {
        RationalValue {
            numerator: v,
            denominator: BigUint::one(),
        }
    }
}

impl From<i64> for RationalValue {
    fn from(v: i64) -> Self {
        BigInt::from(v).into()
    }
}

/// `max(|p|, q)` for `p/q` in lowest terms.
pub fn height_rational(v: &RationalValue) -> BigUint {
    v.numerator.magnitude().clone().max(v.denominator.clone())
}

/// Maximum of the tuple length and the heights of its entries.
pub fn height_tuple(vs: &[RationalValue]) -> BigUint {
    vs.iter()
        .map(height_rational)
        .fold(BigUint::from(vs.len()), BigUint::max)
}

pub fn height_int_tuple(vs: &[BigInt]) -> BigUint {
    vs.iter()
        .map(|v| v.magnitude().clone())
        .fold(BigUint::from(vs.len()), BigUint::max)
}

/// `(2 + 2^(2^(n-4)))^(2^(n-4))`, the height bound for solutions of `S_n`.
pub fn s_bound(n: usize) -> Result<BigUint> {
    if n < 4 {
        return Err(Error::Precondition(format!("S_n needs n >= 4, got {n}")));
    }
    Ok((tower(n - 4) + 2u32).pow(1u32 << (n - 4)))
}

/// The solution of `S_n` of maximal height.
pub fn s_max_solution(n: usize) -> Result<Vec<BigInt>> {
    if n < 4 {
        return Err(Error::Precondition(format!("S_n needs n >= 4, got {n}")));
    }
    let e = 1u32 << (n - 4);
    let t = BigInt::from(tower(n - 4));
    let base: BigInt = &t + 2;
    let mut out: Vec<BigInt> = (1..=n - 3).map(|i| base.pow(1u32 << (i - 1))).collect();
    out.push(&t + 1);
    out.push(t.clone());
    out.push((BigInt::one() + (t >> 1usize)).pow(e));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem4Report {
    pub n: usize,
    pub bound: BigUint,
    pub outer: BigUint,
    pub solution_count: usize,
    pub positive_solution: Option<Vec<BigInt>>,
    pub annulus_empty: bool,
    /// All solutions attaining the largest absolute coordinate.
    pub max_height_solutions: Vec<Vec<BigInt>>,
    pub expected_max: Vec<BigInt>,
}

impl Theorem4Report {
    pub fn passed(&self) -> bool {
        self.solution_count > 0
            && self.positive_solution.is_some()
            && self.annulus_empty
            && self.max_height_solutions == [self.expected_max.clone()]
    }
}

impl fmt::Display for Theorem4Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::boxsolver::render_tuple;
        writeln!(f, "n={} bound={}", self.n, self.bound)?;
        writeln!(f, "solutions={}", self.solution_count)?;
        match &self.positive_solution {
            Some(v) => writeln!(f, "positive={}", render_tuple(v))?,
            None => writeln!(f, "positive=-")?,
        }
        writeln!(f, "annulus ({}, {}] empty={}", self.bound, self.outer, self.annulus_empty)?;
        for v in &self.max_height_solutions {
            writeln!(f, "max_height={}", render_tuple(v))?;
        }
        writeln!(f, "pass={}", self.passed())
    }
}

/// Checks, for `4 <= n <= 6`, that `S_n` has a positive solution within the
/// height bound, none between the bound and `slack` times the bound, and that
/// the maximal-height solution is unique and equals [`s_max_solution`].
pub fn verify_theorem4(n: usize, slack: u32, opts: &SolveOptions) -> Result<Theorem4Report> {
    if !(4..=6).contains(&n) {
        return Err(Error::Precondition(format!("verification is capped at 4 <= n <= 6, got {n}")));
    }
    if slack < 2 {
        return Err(Error::Precondition(format!("slack must be at least 2, got {slack}")));
    }
    let system = gen_s(n)?;
    let bound = s_bound(n)?;
    let outer = &bound * slack;
    let sols = solve_box(&system, &SearchBox::symmetric(n, &bound.clone().into()), opts)?;
    let positive_solution = sols
        .solutions
        .iter()
        .find(|v| v.iter().all(Signed::is_positive))
        .cloned();
    let empty = annulus_empty(&system, &bound.clone().into(), &outer.clone().into(), opts)?;
    // the floor n in the tuple height ties every solution of S_4, so rank by
    // the largest absolute coordinate
    let magnitude = |v: &Vec<BigInt>| v.iter().map(|x| x.magnitude().clone()).max();
    let max_height = sols.solutions.iter().map(magnitude).max().flatten();
    let max_height_solutions = sols
        .solutions
        .iter()
        .filter(|v| magnitude(v) == max_height)
        .cloned()
        .collect();
    Ok(Theorem4Report {
        n,
        bound,
        outer,
        solution_count: sols.len(),
        positive_solution,
        annulus_empty: empty,
        max_height_solutions,
        expected_max: s_max_solution(n)?,
    })
}
