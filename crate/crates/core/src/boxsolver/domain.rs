//! Interval domains and per-equation narrowing.
//!
//! Every domain stays inside the initial box, so when the box fits in
//! `[-2^62, 2^62]` all intermediate products fit in an `i128` and the
//! narrowing is exact. Larger boxes use `BigInt` with identical code.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::Signed;

use crate::eqdsl::Equation;

pub(crate) trait DomainInt:
    Clone + Ord + Integer + Signed + Roots + From<i32> + Send + Sync + Debug
{
    fn to_bigint(&self) -> BigInt;
}

impl DomainInt for i128 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl DomainInt for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

fn ceil_div<T: DomainInt>(a: &T, b: &T) -> T {
    -(-a.clone()).div_floor(b)
}

fn ceil_sqrt<T: DomainInt>(a: &T) -> T {
    let r = a.sqrt();
    if &(r.clone() * r.clone()) == a {
        r
    } else {
        r + T::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: DomainInt> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &T) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }
}

/// Narrowing found an empty domain.
pub(crate) struct Wipeout;

type Narrowed = Result<bool, Wipeout>;

/// Intersects `d` with `[lo, hi]`; `Ok(true)` if `d` shrank.
fn tighten<T: DomainInt>(d: &mut Interval<T>, lo: T, hi: T) -> Narrowed {
    let mut changed = false;
    if lo > d.lo {
        d.lo = lo;
        changed = true;
    }
    if hi < d.hi {
        d.hi = hi;
        changed = true;
    }
    if d.is_empty() {
        Err(Wipeout)
    } else {
        Ok(changed)
    }
}

fn mul_hull<T: DomainInt>(a: &Interval<T>, b: &Interval<T>) -> (T, T) {
    let corners = [
        a.lo.clone() * b.lo.clone(),
        a.lo.clone() * b.hi.clone(),
        a.hi.clone() * b.lo.clone(),
        a.hi.clone() * b.hi.clone(),
    ];
    let lo = corners.iter().min().cloned().unwrap();
    let hi = corners.iter().max().cloned().unwrap();
    (lo, hi)
}

/// Integer hull of `{z / y}` for `y` of constant sign.
fn quot_hull<T: DomainInt>(z: &Interval<T>, y: &Interval<T>) -> (T, T) {
    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    for zb in [&z.lo, &z.hi] {
        for yb in [&y.lo, &y.hi] {
            let c = ceil_div(zb, yb);
            let f = zb.div_floor(yb);
            lo = Some(match lo {
                Some(l) if l <= c => l,
                _ => c,
            });
            hi = Some(match hi {
                Some(h) if h >= f => h,
                _ => f,
            });
        }
    }
    (lo.unwrap(), hi.unwrap())
}

/// One equation compiled to a narrowing rule over 0-based variables.
#[derive(Clone, Debug)]
pub(crate) enum Propagator {
    /// `sum(c * x) + constant = 0`, no zero coefficients.
    Linear {
        terms: Vec<(usize, i32)>,
        constant: i32,
    },
    /// `x * x = x`
    Idempotent(usize),
    /// `x * x = z`
    Square { x: usize, z: usize },
    /// `x * y = x`
    Annihilate { x: usize, y: usize },
    /// `x * y = z`, all distinct
    Product { x: usize, y: usize, z: usize },
}

fn linear(pairs: &[(usize, i32)], constant: i32) -> Propagator {
    let mut terms: Vec<(usize, i32)> = Vec::new();
    for &(v, c) in pairs {
        match terms.iter_mut().find(|(w, _)| *w == v) {
            Some(t) => t.1 += c,
            None => terms.push((v, c)),
        }
    }
    terms.retain(|&(_, c)| c != 0);
    Propagator::Linear { terms, constant }
}

impl Propagator {
    pub fn compile(eq: &Equation) -> Self {
        match *eq {
            Equation::Sum(i, j, k) => linear(&[(i - 1, 1), (j - 1, 1), (k - 1, -1)], 0),
            Equation::Successor(i, k) => linear(&[(i - 1, 1), (k - 1, -1)], 1),
            Equation::Product(i, j, k) => {
                let (i, j, k) = (i - 1, j - 1, k - 1);
                match (i == j, k == i, k == j) {
                    (true, true, _) => Propagator::Idempotent(i),
                    (true, false, _) => Propagator::Square { x: i, z: k },
                    (false, true, _) => Propagator::Annihilate { x: i, y: j },
                    (false, _, true) => Propagator::Annihilate { x: j, y: i },
                    _ => Propagator::Product { x: i, y: j, z: k },
                }
            }
        }
    }

    pub fn narrow<T: DomainInt>(&self, d: &mut [Interval<T>]) -> Narrowed {
        match self {
            Propagator::Linear { terms, constant } => narrow_linear(terms, *constant, d),
            Propagator::Idempotent(x) => {
                let hi = T::one();
                tighten(&mut d[*x], T::zero(), hi)
            }
            Propagator::Square { x, z } => narrow_square(*x, *z, d),
            Propagator::Annihilate { x, y } => {
                let mut changed = false;
                if !d[*y].contains(&T::one()) {
                    changed |= tighten(&mut d[*x], T::zero(), T::zero())?;
                }
                if !d[*x].contains(&T::zero()) {
                    changed |= tighten(&mut d[*y], T::one(), T::one())?;
                }
                Ok(changed)
            }
            Propagator::Product { x, y, z } => narrow_product(*x, *y, *z, d),
        }
    }
}

fn term_range<T: DomainInt>(c: i32, d: &Interval<T>) -> (T, T) {
    let c = T::from(c);
    if c.is_positive() {
        (c.clone() * d.lo.clone(), c * d.hi.clone())
    } else {
        (c.clone() * d.hi.clone(), c * d.lo.clone())
    }
}

fn narrow_linear<T: DomainInt>(terms: &[(usize, i32)], constant: i32, d: &mut [Interval<T>]) -> Narrowed {
    if terms.is_empty() {
        return if constant == 0 { Ok(false) } else { Err(Wipeout) };
    }
    let mut changed = false;
    for (pos, &(v, c)) in terms.iter().enumerate() {
        // c * x_v = -constant - rest
        let mut rest_lo = T::from(constant);
        let mut rest_hi = T::from(constant);
        for (other, &(w, cw)) in terms.iter().enumerate() {
            if other != pos {
                let (l, h) = term_range(cw, &d[w]);
                rest_lo = rest_lo + l;
                rest_hi = rest_hi + h;
            }
        }
        let (tlo, thi) = (-rest_hi, -rest_lo);
        let c = T::from(c);
        let (lo, hi) = if c.is_positive() {
            (ceil_div(&tlo, &c), thi.div_floor(&c))
        } else {
            (ceil_div(&thi, &c), tlo.div_floor(&c))
        };
        changed |= tighten(&mut d[v], lo, hi)?;
    }
    Ok(changed)
}

fn narrow_square<T: DomainInt>(x: usize, z: usize, d: &mut [Interval<T>]) -> Narrowed {
    let dx = &d[x];
    let lo_sq = dx.lo.clone() * dx.lo.clone();
    let hi_sq = dx.hi.clone() * dx.hi.clone();
    let sq_hi = lo_sq.clone().max(hi_sq.clone());
    let sq_lo = if dx.contains(&T::zero()) {
        T::zero()
    } else {
        lo_sq.min(hi_sq)
    };
    let mut changed = tighten(&mut d[z], sq_lo, sq_hi)?;

    // |x| in [c, r] where c^2 is the least square >= z.lo and r^2 the greatest <= z.hi
    let r = d[z].hi.sqrt();
    let c = ceil_sqrt(&d[z].lo.clone().max(T::zero()));
    if c > r {
        return Err(Wipeout);
    }
    changed |= tighten(&mut d[z], c.clone() * c.clone(), r.clone() * r.clone())?;
    changed |= tighten(&mut d[x], -r.clone(), r)?;
    let neg_c = -c.clone();
    let dx = &mut d[x];
    if dx.lo > neg_c && dx.lo < c {
        dx.lo = c.clone();
        changed = true;
    }
    if dx.hi < c && dx.hi > neg_c {
        dx.hi = neg_c;
        changed = true;
    }
    if dx.is_empty() {
        return Err(Wipeout);
    }
    Ok(changed)
}

/// Narrows factor `x` of `x * y = z`.
fn narrow_factor<T: DomainInt>(x: usize, y: usize, z: usize, d: &mut [Interval<T>]) -> Narrowed {
    let zero = T::zero();
    let mut changed = false;
    if !d[z].contains(&zero) {
        let dx = &mut d[x];
        if dx.lo.is_zero() {
            dx.lo = T::one();
            changed = true;
        }
        if dx.hi.is_zero() {
            dx.hi = -T::one();
            changed = true;
        }
        if dx.is_empty() {
            return Err(Wipeout);
        }
    } else if d[y].contains(&zero) {
        return Ok(changed);
    }
    let dy = &d[y];
    let parts = [
        Interval::new(dy.lo.clone(), dy.hi.clone().min(-T::one())),
        Interval::new(dy.lo.clone().max(T::one()), dy.hi.clone()),
    ];
    let mut hull: Option<(T, T)> = None;
    for part in parts.iter().filter(|p| !p.is_empty()) {
        let (l, h) = quot_hull(&d[z], part);
        hull = Some(match hull {
            None => (l, h),
            Some((hl, hh)) => (hl.min(l), hh.max(h)),
        });
    }
    match hull {
        // y = 0 while z excludes 0
        None => Err(Wipeout),
        Some((lo, hi)) => Ok(changed | tighten(&mut d[x], lo, hi)?),
    }
}

/// If factor `x` is a nonzero singleton, `z` must be one of its multiples.
fn narrow_multiple<T: DomainInt>(x: usize, z: usize, d: &mut [Interval<T>]) -> Narrowed {
    if !d[x].is_singleton() || d[x].lo.is_zero() {
        return Ok(false);
    }
    let m = d[x].lo.abs();
    let lo = ceil_div(&d[z].lo, &m) * m.clone();
    let hi = d[z].hi.div_floor(&m) * m;
    tighten(&mut d[z], lo, hi)
}

fn narrow_product<T: DomainInt>(x: usize, y: usize, z: usize, d: &mut [Interval<T>]) -> Narrowed {
    let (lo, hi) = mul_hull(&d[x], &d[y]);
    let mut changed = tighten(&mut d[z], lo, hi)?;
    changed |= narrow_multiple(x, z, d)?;
    changed |= narrow_multiple(y, z, d)?;
    changed |= narrow_factor(x, y, z, d)?;
    changed |= narrow_factor(y, x, z, d)?;
    Ok(changed)
}
