//! Exhaustive enumeration of the integer solutions of a [`System`] inside a
//! finite box.
//!
//! Search alternates interval propagation to a fixed point with binary
//! branching on the variable of smallest domain (lowest index on ties):
//! first `x = lo`, then `x in [lo + 1, hi]`. Results are sorted, so the output
//! does not depend on the number of worker threads.

mod domain;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::eqdsl::System;
use crate::{Error, Result};
use domain::{DomainInt, Interval, Propagator};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

/// Per-variable closed integer intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBox {
    pub domains: Vec<(BigInt, BigInt)>,
}

impl SearchBox {
    /// `[-bound, bound]` for every variable.
    pub fn symmetric(var_count: usize, bound: &BigInt) -> Self {
        SearchBox {
            domains: vec![(-bound.clone(), bound.clone()); var_count],
        }
    }

    /// `[1, bound]` for every variable.
    pub fn positive(var_count: usize, bound: &BigInt) -> Self {
        SearchBox {
            domains: vec![(BigInt::one(), bound.clone()); var_count],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.domains.iter().any(|(lo, hi)| lo > hi)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        v.len() == self.domains.len()
            && self.domains.iter().zip(v).all(|((lo, hi), x)| lo <= x && x <= hi)
    }

    fn fits_i128(&self) -> bool {
        let limit = BigInt::one() << 62;
        self.domains
            .iter()
            .all(|(lo, hi)| lo.abs() <= limit && hi.abs() <= limit)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    /// Strictly increasing in lexicographic order.
    pub solutions: Vec<Vec<BigInt>>,
    #[serde(rename = "box")]
    pub search_box: SearchBox,
    pub complete_within_box: bool,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// `count <N>` header, followed by one `(v1, ..., vn)` line per solution if `list`.
    pub fn render(&self, list: bool) -> String {
        let mut out = format!("count {}\n", self.solutions.len());
        if list {
            for s in &self.solutions {
                out.push_str(&render_tuple(s));
                out.push('\n');
            }
        }
        out
    }
}

pub fn render_tuple(v: &[BigInt]) -> String {
    let mut out = String::from("(");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{x}").unwrap();
    }
    out.push(')');
    out
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Maximum number of propagation passes plus branches.
    pub node_budget: u64,
    /// Worker threads; 1 runs on the calling thread.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            threads: 1,
        }
    }
}

struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    fn tick(&self) -> Result<()> {
        if self.used.fetch_add(1, Ordering::Relaxed) >= self.limit {
            Err(Error::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

struct Search<'a> {
    props: Vec<Propagator>,
    budget: &'a Budget,
    /// Stop once this many solutions are known.
    limit: Option<usize>,
    found: AtomicUsize,
    stop: AtomicBool,
}

impl Search<'_> {
    /// Returns `false` if some domain became empty.
    fn fixpoint<T: DomainInt>(&self, d: &mut [Interval<T>]) -> Result<bool> {
        if d.iter().any(Interval::is_empty) {
            return Ok(false);
        }
        loop {
            self.budget.tick()?;
            let mut changed = false;
            for p in &self.props {
                match p.narrow(d) {
                    Ok(c) => changed |= c,
                    Err(_) => return Ok(false),
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    fn branch_var<T: DomainInt>(d: &[Interval<T>]) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (i, iv) in d.iter().enumerate() {
            if iv.is_singleton() {
                continue;
            }
            let w = iv.width();
            if best.as_ref().is_none_or(|(_, bw)| &w < bw) {
                best = Some((i, w));
            }
        }
        best.map(|(i, _)| i)
    }

    fn record<T: DomainInt>(&self, d: &[Interval<T>], out: &mut Vec<Vec<T>>) {
        out.push(d.iter().map(|iv| iv.lo.clone()).collect());
        let total = self.found.fetch_add(1, Ordering::Relaxed) + 1;
        if self.limit.is_some_and(|l| total >= l) {
            self.stop.store(true, Ordering::Relaxed);
        }
    }

    fn dfs<T: DomainInt>(&self, mut d: Vec<Interval<T>>, out: &mut Vec<Vec<T>>) -> Result<()> {
        loop {
            if self.stop.load(Ordering::Relaxed) || !self.fixpoint(&mut d)? {
                return Ok(());
            }
            let Some(v) = Self::branch_var(&d) else {
                self.record(&d, out);
                return Ok(());
            };
            let lo = d[v].lo.clone();
            let mut left = d.clone();
            left[v].hi = lo.clone();
            self.dfs(left, out)?;
            d[v].lo = lo + T::one();
        }
    }

    /// Splits the root on its branch variable into disjoint chunks.
    fn split_root<T: DomainInt>(&self, mut d: Vec<Interval<T>>, pieces: usize) -> Result<Vec<Vec<Interval<T>>>> {
        if !self.fixpoint(&mut d)? {
            return Ok(Vec::new());
        }
        let Some(v) = Self::branch_var(&d) else {
            return Ok(vec![d]);
        };
        let width = d[v].width() + T::one();
        let pieces = match width.to_bigint().to_usize() {
            Some(w) if w < pieces => w,
            _ => pieces,
        };
        let (lo, hi) = (d[v].lo.clone(), d[v].hi.clone());
        let step = width.div_floor(&T::from(pieces as i32));
        let mut out = Vec::with_capacity(pieces);
        let mut start = lo;
        for p in 0..pieces {
            let end = if p + 1 == pieces {
                hi.clone()
            } else {
                start.clone() + step.clone() - T::one()
            };
            let mut piece = d.clone();
            piece[v] = Interval::new(start.clone(), end.clone());
            out.push(piece);
            start = end + T::one();
        }
        Ok(out)
    }

    fn run<T: DomainInt>(&self, d: Vec<Interval<T>>, threads: usize) -> Result<Vec<Vec<T>>> {
        let mut out = Vec::new();
        if threads <= 1 {
            self.dfs(d, &mut out)?;
        } else {
            let pieces = self.split_root(d, threads * 8)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            let parts: Vec<Result<Vec<Vec<T>>>> = pool.install(|| {
                pieces
                    .into_par_iter()
                    .map(|piece| {
                        let mut local = Vec::new();
                        self.dfs(piece, &mut local).map(|_| local)
                    })
                    .collect()
            });
            for part in parts {
                out.extend(part?);
            }
        }
        out.sort();
        if let Some(l) = self.limit {
            out.truncate(l);
        }
        Ok(out)
    }
}

fn to_intervals<T: DomainInt>(b: &SearchBox, conv: impl Fn(&BigInt) -> T) -> Vec<Interval<T>> {
    b.domains
        .iter()
        .map(|(lo, hi)| Interval::new(conv(lo), conv(hi)))
        .collect()
}

fn check_arity(s: &System, b: &SearchBox) -> Result<()> {
    if b.domains.len() != s.var_count {
        return Err(Error::LengthMismatch {
            expected: s.var_count,
            got: b.domains.len(),
        });
    }
    if !crate::eqdsl::validate(s).is_empty() {
        return Err(Error::Precondition("system has out-of-range indices".into()));
    }
    Ok(())
}

fn new_search<'a>(s: &System, budget: &'a Budget, limit: Option<usize>) -> Search<'a> {
    Search {
        props: s.equations.iter().map(Propagator::compile).collect(),
        budget,
        limit,
        found: AtomicUsize::new(0),
        stop: AtomicBool::new(false),
    }
}

fn enumerate(s: &System, b: &SearchBox, opts: &SolveOptions, limit: Option<usize>) -> Result<Vec<Vec<BigInt>>> {
    check_arity(s, b)?;
    let budget = Budget::new(opts.node_budget);
    let search = new_search(s, &budget, limit);
    let threads = opts.threads.max(1);
    if b.fits_i128() {
        let d = to_intervals(b, |x| x.to_i128().expect("bounded by 2^62"));
        let sols = search.run::<i128>(d, threads)?;
        Ok(sols
            .into_iter()
            .map(|v| v.into_iter().map(BigInt::from).collect())
            .collect())
    } else {
        let d = to_intervals(b, BigInt::clone);
        search.run::<BigInt>(d, threads)
    }
}

/// Narrows every domain to the fixed point of per-equation interval
/// reasoning. Never removes a solution that lies inside `b`; an empty domain
/// in the result means `b` holds no solution.
pub fn propagate(s: &System, b: &SearchBox, opts: &SolveOptions) -> Result<SearchBox> {
    check_arity(s, b)?;
    let budget = Budget::new(opts.node_budget);
    let search = new_search(s, &budget, None);
    fn finish<T: DomainInt>(search: &Search<'_>, mut d: Vec<Interval<T>>) -> Result<SearchBox> {
        if !search.fixpoint(&mut d)? && !d.iter().any(Interval::is_empty) {
            // a rule failed without writing back an empty domain
            d[0] = Interval::new(T::one(), T::zero());
        }
        Ok(SearchBox {
            domains: d.iter().map(|iv| (iv.lo.to_bigint(), iv.hi.to_bigint())).collect(),
        })
    }
    if b.fits_i128() {
        finish(&search, to_intervals(b, |x| x.to_i128().expect("bounded by 2^62")))
    } else {
        finish(&search, to_intervals(b, BigInt::clone))
    }
}

/// All integer solutions of `s` inside `b`, sorted lexicographically.
pub fn solve_box(s: &System, b: &SearchBox, opts: &SolveOptions) -> Result<SolutionSet> {
    let solutions = enumerate(s, b, opts, None)?;
    Ok(SolutionSet {
        solutions,
        search_box: b.clone(),
        complete_within_box: true,
    })
}

/// The lexicographically first solution in `b`, if any.
pub fn first_solution(s: &System, b: &SearchBox, opts: &SolveOptions) -> Result<Option<Vec<BigInt>>> {
    // sequential so that "first" is well defined
    let opts = SolveOptions { threads: 1, ..*opts };
    Ok(enumerate(s, b, &opts, Some(1))?.into_iter().next())
}

/// True iff no solution in the symmetric box of radius `outer` has a
/// coordinate of absolute value greater than `inner`.
pub fn annulus_empty(s: &System, inner: &BigInt, outer: &BigInt, opts: &SolveOptions) -> Result<bool> {
    if inner.is_negative() || inner >= outer {
        return Err(Error::Precondition(format!(
            "annulus needs 0 <= inner < outer, got {inner} and {outer}"
        )));
    }
    let base = SearchBox::symmetric(s.var_count, outer);
    let shell = inner + BigInt::one();
    for v in 0..s.var_count {
        for side in [(shell.clone(), outer.clone()), (-outer.clone(), -shell.clone())] {
            let mut b = base.clone();
            b.domains[v] = side;
            if first_solution(s, &b, opts)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// 1-based indices of variables that occur in no equation.
pub fn free_variable_scan(s: &System) -> BTreeSet<usize> {
    let used: BTreeSet<usize> = s.equations.iter().flat_map(|e| e.indices()).collect();
    (1..=s.var_count).filter(|i| !used.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqdsl::{evaluate, Equation};
    use crate::families::{gen_b, gen_s, gen_t};
    use proptest::prelude::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn tuples(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|t| t.iter().map(|&x| bi(x)).collect()).collect()
    }

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    /// Naive oracle: every tuple of the box.
    fn brute(s: &System, bound: i64) -> Vec<Vec<BigInt>> {
        let n = s.var_count;
        let side = (2 * bound + 1) as usize;
        let mut out = Vec::new();
        for code in 0..side.pow(n as u32) {
            let mut c = code;
            let mut v = vec![bi(0); n];
            for slot in v.iter_mut().rev() {
                *slot = bi((c % side) as i64 - bound);
                c /= side;
            }
            if evaluate(s, &v).unwrap() {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn propagate_examples() {
        let s = System::new(2, vec![Equation::Product(1, 1, 2)]);
        let b = propagate(&s, &SearchBox::symmetric(2, &bi(100)), &opts()).unwrap();
        assert!(b.domains[0].0 >= bi(-10) && b.domains[0].1 <= bi(10));

        let s6 = gen_s(6).unwrap();
        let b = propagate(&s6, &SearchBox::symmetric(6, &bi(104976)), &opts()).unwrap();
        assert!(b.domains[0].0 >= bi(-18) && b.domains[0].1 <= bi(18));

        let s = System::new(1, vec![Equation::Sum(1, 1, 1)]);
        let b = SearchBox {
            domains: vec![(bi(5), bi(9))],
        };
        assert!(propagate(&s, &b, &opts()).unwrap().is_empty());
    }

    #[test]
    fn idempotents() {
        let s = System::new(1, vec![Equation::Product(1, 1, 1)]);
        let sols = solve_box(&s, &SearchBox::symmetric(1, &bi(10)), &opts()).unwrap();
        assert_eq!(sols.solutions, tuples(&[&[0], &[1]]));
        assert!(sols.complete_within_box);
    }

    #[test]
    fn s4_full_enumeration() {
        let s = gen_s(4).unwrap();
        let sols = solve_box(&s, &SearchBox::symmetric(4, &bi(8)), &opts()).unwrap();
        assert_eq!(
            sols.solutions,
            tuples(&[&[0, -1, -2, 0], &[1, 0, -1, -1], &[3, 2, 1, 3], &[4, 3, 2, 2]])
        );
        assert_eq!(
            sols.render(true),
            "count 4\n(0, -1, -2, 0)\n(1, 0, -1, -1)\n(3, 2, 1, 3)\n(4, 3, 2, 2)\n"
        );
        assert_eq!(sols.render(false), "count 4\n");
    }

    #[test]
    fn b13_and_t12_counts() {
        let b = solve_box(&gen_b(13).unwrap(), &SearchBox::symmetric(13, &bi(8)), &opts()).unwrap();
        assert_eq!(b.len(), 97);
        let t = solve_box(&gen_t(12).unwrap(), &SearchBox::symmetric(12, &bi(16)), &opts()).unwrap();
        assert_eq!(t.len(), 22);
    }

    #[test]
    fn bigint_path_agrees_with_i128_path() {
        // A huge outer box forces the BigInt domains; the answer is the same.
        let s = gen_b(13).unwrap();
        let huge = BigInt::one() << 80;
        let small = solve_box(&s, &SearchBox::symmetric(13, &bi(8)), &opts()).unwrap();
        let big = solve_box(&s, &SearchBox::symmetric(13, &huge), &opts()).unwrap();
        assert_eq!(small.len(), 97);
        assert_eq!(small.solutions, big.solutions);
    }

    #[test]
    fn annulus_examples() {
        let o = opts();
        assert!(annulus_empty(&gen_s(4).unwrap(), &bi(4), &bi(8), &o).unwrap());
        let idem = System::new(1, vec![Equation::Product(1, 1, 1)]);
        assert!(annulus_empty(&idem, &bi(1), &bi(100), &o).unwrap());
        let sum = System::new(3, vec![Equation::Sum(1, 2, 3)]);
        assert!(!annulus_empty(&sum, &bi(1), &bi(2), &o).unwrap());
        assert!(annulus_empty(&sum, &bi(2), &bi(2), &o).is_err());
    }

    #[test]
    fn free_variables() {
        let s = System::new(3, vec![Equation::Product(1, 1, 2)]);
        assert_eq!(free_variable_scan(&s), BTreeSet::from([3]));
        assert!(free_variable_scan(&gen_t(12).unwrap()).is_empty());
        assert_eq!(free_variable_scan(&System::new(2, vec![])), BTreeSet::from([1, 2]));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let s = System::new(3, vec![Equation::Sum(1, 2, 3)]);
        let o = SolveOptions {
            node_budget: 50,
            threads: 1,
        };
        assert!(matches!(
            solve_box(&s, &SearchBox::symmetric(3, &bi(20)), &o),
            Err(Error::BudgetExceeded { limit: 50 })
        ));
    }

    #[test]
    fn threads_do_not_change_output() {
        let s = gen_t(13).unwrap();
        let b = SearchBox::symmetric(13, &bi(64));
        let one = solve_box(&s, &b, &opts()).unwrap();
        let many = solve_box(&s, &b, &SolveOptions { threads: 4, ..opts() }).unwrap();
        assert_eq!(one.render(true), many.render(true));
        assert_eq!(one.len(), 80);
    }

    fn arb_small_system() -> impl Strategy<Value = System> {
        (1usize..=4).prop_flat_map(|n| {
            let idx = 1..=n;
            let eq = prop_oneof![
                (idx.clone(), idx.clone(), idx.clone()).prop_map(|(i, j, k)| Equation::Sum(i, j, k)),
                (idx.clone(), idx.clone(), idx.clone())
                    .prop_map(|(i, j, k)| Equation::Product(i, j, k)),
                (idx.clone(), idx).prop_map(|(i, k)| Equation::Successor(i, k)),
            ];
            prop::collection::vec(eq, 0..4).prop_map(move |eqs| System::new(n, eqs))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn agrees_with_naive_enumeration(s in arb_small_system(), bound in 0i64..=4) {
            let got = solve_box(&s, &SearchBox::symmetric(s.var_count, &bi(bound)), &opts()).unwrap();
            prop_assert_eq!(got.solutions, brute(&s, bound));
        }

        #[test]
        fn propagation_keeps_every_solution(s in arb_small_system(), bound in 0i64..=4) {
            let b = SearchBox::symmetric(s.var_count, &bi(bound));
            let narrowed = propagate(&s, &b, &opts()).unwrap();
            for v in brute(&s, bound) {
                prop_assert!(narrowed.contains(&v));
            }
        }

        #[test]
        fn order_invariance_and_monotonicity(s in arb_small_system(), rot in 0usize..4) {
            let mut p = s.clone();
            let len = p.equations.len();
            if len > 0 {
                p.equations.rotate_left(rot % len);
                p.equations.reverse();
            }
            let b2 = SearchBox::symmetric(s.var_count, &bi(5));
            let b1 = SearchBox::symmetric(s.var_count, &bi(2));
            let a = solve_box(&s, &b2, &opts()).unwrap();
            prop_assert_eq!(&a.solutions, &solve_box(&p, &b2, &opts()).unwrap().solutions);
            let small = solve_box(&s, &b1, &opts()).unwrap();
            for v in &small.solutions {
                prop_assert!(a.solutions.binary_search(v).is_ok());
            }
            for v in &a.solutions {
                prop_assert!(evaluate(&s, v).unwrap());
            }
            prop_assert!(a.solutions.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
