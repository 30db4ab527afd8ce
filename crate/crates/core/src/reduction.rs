//! Sparse integer polynomials and the reduction that turns `D(x) = 0` into
//! an equation whose number of integer solutions exceeds the height of every
//! integer root of `D`:
//!
//! ```text
//! D(x)^2 + (n^2 + x_1^2 + ... + x_n^2 - u_1^2 - ... - u_4^2 - v_1^2 - ... - v_4^2)^2 = 0
//! ```
//!
//! Polynomial text format: terms joined by `+`/`-`, each an optional integer
//! coefficient and `*`-separated factors `x<i>[^<e>]`, e.g. `x1^2 - 4`. An
//! optional `vars <n>` line fixes the variable count when it exceeds the
//! largest index used; `#` lines are comments.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::census::height_int_tuple;
use crate::numtheory::{rk_bruteforce, RK_LIMIT_LARGE_K};
use crate::{Error, Result};

/// Default cap on the number of points visited when enumerating roots.
pub const ROOT_SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    var_count: usize,
    /// Exponent vector of length `var_count` to nonzero coefficient.
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Polynomial {
    pub fn zero(var_count: usize) -> Self {
        Polynomial {
            var_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(var_count: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(var_count);
        p.add_term(vec![0; var_count], c.into());
        p
    }

    /// The variable `x_index` (1-based).
    pub fn var(var_count: usize, index: usize) -> Self {
        let mut exps = vec![0; var_count];
        exps[index - 1] = 1;
        let mut p = Self::zero(var_count);
        p.add_term(exps, BigInt::one());
        p
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Same polynomial viewed in `var_count >= self.var_count` variables.
    pub fn extend_vars(&self, var_count: usize) -> Self {
        assert!(var_count >= self.var_count);
        Polynomial {
            var_count,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e.resize(var_count, 0);
                    (e, c.clone())
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.var_count, other.var_count);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            var_count: self.var_count,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.var_count, other.var_count);
        let mut out = Self::zero(self.var_count);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }
}

/// Exact evaluation at an integer point.
pub fn eval_poly(p: &Polynomial, v: &[BigInt]) -> Result<BigInt> {
    if v.len() != p.var_count {
        return Err(Error::LengthMismatch {
            expected: p.var_count,
            got: v.len(),
        });
    }
    let mut total = BigInt::zero();
    for (exps, c) in &p.terms {
        let mut term = c.clone();
        for (x, &e) in v.iter().zip(exps) {
            if e > 0 {
                term *= x.pow(e);
            }
        }
        total += term;
    }
    Ok(total)
}

fn syntax(message: impl Into<String>) -> Error {
    Error::Syntax {
        line: 1,
        message: message.into(),
    }
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigUint> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(syntax(format!("expected a number at offset {start}")));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii")
            .parse()
            .expect("digits"))
    }
}

type RawTerm = (BigInt, BTreeMap<usize, u32>);

fn parse_factor(lx: &mut Lexer<'_>, coeff: &mut BigInt, exps: &mut BTreeMap<usize, u32>) -> Result<()> {
    match lx.peek() {
        Some(b'x') => {
            lx.pos += 1;
            let index = lx
                .number()?
                .to_usize()
                .filter(|&i| i >= 1)
                .ok_or_else(|| syntax("variable index must be a positive integer"))?;
            let e = if lx.peek() == Some(b'^') {
                lx.pos += 1;
                lx.number()?
                    .to_u32()
                    .ok_or_else(|| syntax("exponent too large"))?
            } else {
                1
            };
            *exps.entry(index).or_insert(0) += e;
            Ok(())
        }
        Some(b) if b.is_ascii_digit() => {
            *coeff *= BigInt::from(lx.number()?);
            Ok(())
        }
        Some(b) => Err(syntax(format!("unexpected `{}` at offset {}", b as char, lx.pos))),
        None => Err(syntax("unexpected end of input")),
    }
}

fn parse_terms(text: &str) -> Result<Vec<RawTerm>> {
    let mut lx = Lexer {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    let mut first = true;
    while lx.peek().is_some() {
        let mut sign = BigInt::one();
        match lx.peek() {
            Some(b'+') => lx.pos += 1,
            Some(b'-') => {
                lx.pos += 1;
                sign = -sign;
            }
            _ if first => {}
            Some(b) => return Err(syntax(format!("expected `+` or `-`, found `{}`", b as char))),
            None => unreachable!(),
        }
        first = false;
        let mut coeff = sign;
        let mut exps = BTreeMap::new();
        parse_factor(&mut lx, &mut coeff, &mut exps)?;
        while lx.peek() == Some(b'*') {
            lx.pos += 1;
            parse_factor(&mut lx, &mut coeff, &mut exps)?;
        }
        out.push((coeff, exps));
    }
    if out.is_empty() {
        return Err(syntax("empty polynomial"));
    }
    Ok(out)
}

pub fn parse_poly(text: &str) -> Result<Polynomial> {
    let mut declared = None;
    let mut body = String::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(n) = line.strip_prefix("vars ") {
            let n: usize = n
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| syntax(format!("invalid `{line}`")))?;
            declared = Some(n);
            continue;
        }
        body.push_str(line);
        body.push(' ');
    }
    let raw = parse_terms(&body)?;
    let used = raw
        .iter()
        .flat_map(|(_, e)| e.keys().copied())
        .max()
        .unwrap_or(1);
    let var_count = match declared {
        Some(n) if n < used => {
            return Err(syntax(format!("x{used} used but only {n} variables declared")))
        }
        Some(n) => n,
        None => used,
    };
    let mut p = Polynomial::zero(var_count);
    for (c, e) in raw {
        let mut exps = vec![0; var_count];
        for (i, k) in e {
            exps[i - 1] = k;
        }
        p.add_term(exps, c);
    }
    Ok(p)
}

impl Polynomial {
    /// Terms by descending total degree, then descending exponent vector.
    fn ordered_terms(&self) -> Vec<(&Vec<u32>, &BigInt)> {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        terms
    }

    fn max_index_used(&self) -> usize {
        self.terms
            .keys()
            .filter_map(|e| e.iter().rposition(|&k| k > 0))
            .max()
            .map_or(0, |i| i + 1)
    }
}

/// The polynomial expression on one line, without a `vars` header.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (pos, (exps, c)) in self.ordered_terms().into_iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (pos, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let mag = c.magnitude();
            let factors: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

pub fn render_poly(p: &Polynomial) -> String {
    if p.max_index_used().max(1) < p.var_count {
        format!("vars {}\n{p}\n", p.var_count)
    } else {
        format!("{p}\n")
    }
}

/// `D^2 + (n^2 + sum x_i^2 - sum u_i^2 - sum v_i^2)^2` in `n + 8` variables;
/// `u_1..u_4, v_1..v_4` are `x_{n+1}..x_{n+8}`.
pub fn build_lemma2(p: &Polynomial) -> Polynomial {
    let n = p.var_count;
    let total = n + 8;
    let mut q = Polynomial::constant(total, BigInt::from(n * n));
    for i in 1..=total {
        let sq = Polynomial::var(total, i).square();
        q = if i <= n { q.add(&sq) } else { q.sub(&sq) };
    }
    p.extend_vars(total).square().add(&q.square())
}

/// [`render_poly`] with a comment header naming the eight appended variables.
pub fn render_reduced(reduced: &Polynomial, original_vars: usize) -> String {
    let mut out = String::from("# reduced equation: expression = 0\n");
    for k in 0..8 {
        let alias = if k < 4 { format!("u{}", k + 1) } else { format!("v{}", k - 3) };
        out.push_str(&format!("# x{} = {alias}\n", original_vars + k + 1));
    }
    out.push_str(&render_poly(reduced));
    out
}

fn box_points(n: usize, bound: i64) -> impl Iterator<Item = Vec<BigInt>> {
    let side = (2 * bound + 1) as u64;
    (0..side.pow(n as u32)).map(move |code| {
        let mut c = code;
        let mut v = vec![BigInt::zero(); n];
        for slot in v.iter_mut().rev() {
            *slot = BigInt::from((c % side) as i64 - bound);
            c /= side;
        }
        v
    })
}

/// Integer roots of `p` in `[-x_box, x_box]^n`, in lexicographic order.
pub fn find_roots(p: &Polynomial, x_box: u32) -> Result<Vec<Vec<BigInt>>> {
    let n = p.var_count;
    if n > 3 {
        return Err(Error::Precondition(format!(
            "root enumeration supports at most 3 variables, got {n}"
        )));
    }
    let side = 2 * x_box as u64 + 1;
    if side.checked_pow(n as u32).is_none_or(|pts| pts > ROOT_SEARCH_BUDGET) {
        return Err(Error::BudgetExceeded {
            limit: ROOT_SEARCH_BUDGET,
        });
    }
    let mut roots = Vec::new();
    for v in box_points(n, x_box as i64) {
        if eval_poly(p, &v)?.is_zero() {
            roots.push(v);
        }
    }
    Ok(roots)
}

fn shifted_norm(root: &[BigInt]) -> Result<u64> {
    let n = BigInt::from(root.len());
    let m: BigInt = root.iter().map(|a| a * a).sum::<BigInt>() + &n * &n;
    m.to_u64()
        .filter(|&m| m <= RK_LIMIT_LARGE_K)
        .ok_or_else(|| Error::Precondition(format!("n^2 + |a|^2 = {m} exceeds {RK_LIMIT_LARGE_K}")))
}

/// Number of integer solutions of [`build_lemma2`]`(p)`, assuming every root
/// of `p` lies in the box: each root `a` contributes `r_8(n^2 + |a|^2)`.
pub fn count_reduced(p: &Polynomial, x_box: u32) -> Result<BigUint> {
    let mut total = BigUint::zero();
    for root in find_roots(p, x_box)? {
        total += rk_bruteforce(8, shifted_norm(&root)?)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma2Status {
    Pass,
    Fail,
    /// `D` has no integer root in the box.
    HypothesisViolation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Report {
    pub roots: Vec<Vec<BigInt>>,
    /// Maximal height of a root tuple.
    pub max_height: Option<BigUint>,
    pub count: Option<BigUint>,
    pub status: Lemma2Status,
}

impl fmt::Display for Lemma2Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Lemma2Status::HypothesisViolation => {
                writeln!(f, "hypothesis_violation: no integer root in the box")
            }
            _ => {
                writeln!(f, "roots={}", self.roots.len())?;
                writeln!(f, "d={}", self.max_height.as_ref().expect("roots exist"))?;
                writeln!(f, "count={}", self.count.as_ref().expect("roots exist"))?;
                writeln!(f, "pass={}", self.status == Lemma2Status::Pass)
            }
        }
    }
}

/// Checks that the reduced equation has more integer solutions than the
/// maximal height `d` of a root of `p` found in the box.
pub fn verify_lemma2(p: &Polynomial, x_box: u32) -> Result<Lemma2Report> {
    let roots = find_roots(p, x_box)?;
    if roots.is_empty() {
        return Ok(Lemma2Report {
            roots,
            max_height: None,
            count: None,
            status: Lemma2Status::HypothesisViolation,
        });
    }
    let d = roots.iter().map(|r| height_int_tuple(r)).max().expect("non-empty");
    let mut count = BigUint::zero();
    for root in &roots {
        count += rk_bruteforce(8, shifted_norm(root)?)?;
    }
    let status = if count > d { Lemma2Status::Pass } else { Lemma2Status::Fail };
    Ok(Lemma2Report {
        roots,
        max_height: Some(d),
        count: Some(count),
        status,
    })
}
