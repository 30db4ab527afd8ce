//! Bounded search for systems of successor and product equations whose
//! positive solutions exceed `(2 + 2^(2^(n-4)))^(2^(n-4))`.
//!
//! Everything reported here is a fact about a finite box `[1, L]^n`. A system
//! marked `within_bound` is merely consistent with the bound; one marked
//! `exceeds_bound` still needs a finiteness argument by hand.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;

use crate::boxsolver::{first_solution, free_variable_scan, render_tuple, solve_box, SearchBox, SolveOptions};
use crate::census::s_bound;
use crate::eqdsl::{Equation, System};
use crate::families::universe_u;
use crate::{Error, Result};

/// Witnesses kept per `exceeds_bound` system.
pub const WITNESS_CAP: usize = 4;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i + 1);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn relabeled_key(eqs: &[Equation], perm: &[usize]) -> Vec<Equation> {
    let mut key: Vec<Equation> = eqs
        .iter()
        .map(|e| e.relabel(|i| perm[i - 1]).canonical())
        .collect();
    key.sort();
    key.dedup();
    key
}

fn min_key(eqs: &[Equation], perms: &[Vec<usize>]) -> Vec<Equation> {
    perms
        .iter()
        .map(|p| relabeled_key(eqs, p))
        .min()
        .unwrap_or_default()
}

/// Representative of `s` up to canonical form and renaming of variables: the
/// lexicographically smallest sorted equation list over all relabelings.
pub fn canonical_labeling(s: &System) -> System {
    System::new(s.var_count, min_key(&s.equations, &permutations(s.var_count)))
}

/// Subsets of `universe_u(n)` with at most `max_eqs` equations, one per
/// relabeling class, ordered by size and then by equation list.
pub fn enumerate_systems(n: usize, max_eqs: usize) -> Result<Vec<System>> {
    if n < 4 {
        return Err(Error::Precondition(format!("explorer needs n >= 4, got {n}")));
    }
    let universe = universe_u(n);
    let perms = permutations(n);
    let mut seen: BTreeSet<(usize, Vec<Equation>)> = BTreeSet::new();
    seen.insert((0, Vec::new()));
    // classes of size k only come from subsets of size k, so extend each
    // representative by larger universe members to reach every subset once
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for size in 1..=max_eqs.min(universe.len()) {
        let next: Vec<Vec<usize>> = frontier
            .iter()
            .flat_map(|subset| {
                let start = subset.last().map_or(0, |&i| i + 1);
                (start..universe.len()).map(move |i| {
                    let mut s = subset.clone();
                    s.push(i);
                    s
                })
            })
            .collect();
        let keys: Vec<Vec<Equation>> = next
            .par_iter()
            .map(|subset| {
                let eqs: Vec<Equation> = subset.iter().map(|&i| universe[i]).collect();
                min_key(&eqs, &perms)
            })
            .collect();
        seen.extend(keys.into_iter().map(|k| (size, k)));
        frontier = next;
    }
    Ok(seen.into_iter().map(|(_, eqs)| System::new(n, eqs)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    NoSolution,
    WithinBound,
    /// Up to [`WITNESS_CAP`] solutions with a coordinate above the bound.
    ExceedsBound(Vec<Vec<BigInt>>),
    LikelyInfinite,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::NoSolution => "no_solution",
            Status::WithinBound => "within_bound",
            Status::ExceedsBound(_) => "exceeds_bound",
            Status::LikelyInfinite => "likely_infinite",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifiedSystem {
    pub system: System,
    pub status: Status,
    pub bound_used: BigUint,
    pub limit_used: BigUint,
    /// Largest coordinate over all solutions in the box, when they were enumerated.
    pub max_coordinate: Option<BigInt>,
}

impl ClassifiedSystem {
    pub fn witnesses(&self) -> &[Vec<BigInt>] {
        match &self.status {
            Status::ExceedsBound(w) => w,
            _ => &[],
        }
    }
}

/// `<status> | <system> | witnesses=<tuples or ->`
impl fmt::Display for ClassifiedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let witnesses = match self.witnesses() {
            [] => "-".to_string(),
            w => w.iter().map(|t| render_tuple(t)).collect::<Vec<_>>().join(" "),
        };
        write!(f, "{} | {} | witnesses={witnesses}", self.status.name(), self.system.one_line())
    }
}

/// Classifies the positive solutions of `s` in `[1, limit]^n`.
pub fn classify(s: &System, n: usize, limit: &BigUint, opts: &SolveOptions) -> Result<ClassifiedSystem> {
    if s.var_count != n {
        return Err(Error::Precondition(format!(
            "system has {} variables, expected {n}",
            s.var_count
        )));
    }
    let bound = s_bound(n)?;
    if limit < &bound {
        return Err(Error::Precondition(format!("limit {limit} is below the bound {bound}")));
    }
    let make = |status, max_coordinate| ClassifiedSystem {
        system: s.clone(),
        status,
        bound_used: bound.clone(),
        limit_used: limit.clone(),
        max_coordinate,
    };
    let mut b = SearchBox::positive(n, &BigInt::from(limit.clone()));
    let free = free_variable_scan(s);
    if !free.is_empty() {
        for &v in &free {
            b.domains[v - 1] = (BigInt::from(1), BigInt::from(1));
        }
        return Ok(match first_solution(s, &b, opts)? {
            Some(_) => make(Status::LikelyInfinite, None),
            None => make(Status::NoSolution, None),
        });
    }
    let set = solve_box(s, &b, opts)?;
    if set.is_empty() {
        return Ok(make(Status::NoSolution, None));
    }
    let big_bound = BigInt::from(bound.clone());
    let max_coordinate = set.solutions.iter().flatten().max().cloned();
    let witnesses: Vec<Vec<BigInt>> = set
        .solutions
        .iter()
        .filter(|t| t.iter().any(|x| x > &big_bound))
        .take(WITNESS_CAP)
        .cloned()
        .collect();
    let status = if witnesses.is_empty() {
        Status::WithinBound
    } else {
        Status::ExceedsBound(witnesses)
    };
    Ok(make(status, max_coordinate))
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub n: usize,
    pub max_eqs: usize,
    pub limit: BigUint,
    /// Every classified system, sorted by one-line rendering.
    pub entries: Vec<ClassifiedSystem>,
    /// Systems whose classification ran out of node budget.
    pub truncated: Vec<System>,
}

impl ScanReport {
    pub fn totals(&self) -> BTreeMap<&'static str, usize> {
        let mut t: BTreeMap<&'static str, usize> = [
            "no_solution",
            "within_bound",
            "exceeds_bound",
            "likely_infinite",
        ]
        .into_iter()
        .map(|k| (k, 0))
        .collect();
        for e in &self.entries {
            *t.get_mut(e.status.name()).expect("known status") += 1;
        }
        t
    }

    /// Entries worth a line in the report: `within_bound` and `exceeds_bound`.
    pub fn listed(&self) -> impl Iterator<Item = &ClassifiedSystem> {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, Status::WithinBound | Status::ExceedsBound(_)))
    }

    pub fn exceeding(&self) -> impl Iterator<Item = &ClassifiedSystem> {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, Status::ExceedsBound(_)))
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.listed() {
            writeln!(f, "{e}")?;
        }
        write!(f, "totals n={} max_eqs={} limit={} systems={}", self.n, self.max_eqs, self.limit, self.entries.len() + self.truncated.len())?;
        for (k, v) in self.totals() {
            write!(f, " {k}={v}")?;
        }
        writeln!(f)?;
        if !self.truncated.is_empty() {
            writeln!(f, "TRUNCATED: {} systems exceeded the node budget", self.truncated.len())?;
            for s in &self.truncated {
                writeln!(f, "  {}", s.one_line())?;
            }
        }
        Ok(())
    }
}

/// `2 * s_bound(n)`.
pub fn default_limit(n: usize) -> Result<BigUint> {
    Ok(s_bound(n)? * 2u32)
}

/// Classifies every system of [`enumerate_systems`]. Systems that exhaust the
/// node budget are listed as truncated instead of failing the scan.
pub fn conjecture_scan(n: usize, max_eqs: usize, limit: &BigUint, opts: &SolveOptions) -> Result<ScanReport> {
    let bound = s_bound(n)?;
    if limit < &bound {
        return Err(Error::Precondition(format!("limit {limit} is below the bound {bound}")));
    }
    let systems = enumerate_systems(n, max_eqs)?;
    let inner = SolveOptions { threads: 1, ..*opts };
    let results: Vec<(System, Result<ClassifiedSystem>)> = systems
        .into_par_iter()
        .map(|s| {
            let r = classify(&s, n, limit, &inner);
            (s, r)
        })
        .collect();
    let mut entries = Vec::new();
    let mut truncated = Vec::new();
    for (s, r) in results {
        match r {
            Ok(c) => entries.push(c),
            Err(Error::BudgetExceeded { .. }) => truncated.push(s),
            Err(e) => return Err(e),
        }
    }
    entries.sort_by_cached_key(|e| e.system.one_line());
    truncated.sort_by_cached_key(|s| s.one_line());
    Ok(ScanReport {
        n,
        max_eqs,
        limit: limit.clone(),
        entries,
        truncated,
    })
}
