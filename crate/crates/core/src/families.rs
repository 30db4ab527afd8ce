//! Generators for the B, T and S system families and the equation universes
//! `E_n` (sums and products) and `U_n` (successors and products).
//!
//! Index expressions such as `n - 11` are evaluated literally, so at the
//! smallest admissible `n` some of them coincide (in `T_12`, `x_{n-11}` is
//! `x_1`).

use crate::eqdsl::{Equation, System};
use crate::{Error, Result};

fn squaring_chain(len: usize) -> impl Iterator<Item = Equation> {
    (1..=len).map(|i| Equation::Product(i, i, i + 1))
}

/// Browkin's system `B_n`, `n >= 13`: `n - 3` equations.
pub fn gen_b(n: usize) -> Result<System> {
    if n < 13 {
        return Err(Error::Precondition(format!("B_n needs n >= 13, got {n}")));
    }
    use Equation::{Product, Sum};
    let mut eqs: Vec<Equation> = squaring_chain(n - 13).collect();
    eqs.extend([
        Sum(n - 11, n - 11, 1),
        Product(n - 11, n - 11, 1),
        Product(n - 10, n - 10, n - 9),
        Product(n - 8, n - 8, n - 7),
        Product(n - 6, n - 6, n - 5),
        Product(n - 4, n - 4, n - 3),
        Sum(n - 9, n - 7, n - 2),
        Sum(n - 5, n - 3, n - 1),
        Sum(n - 2, n - 1, n),
        Sum(n - 11, n - 12, n),
    ]);
    Ok(System::new(n, eqs))
}

/// The system `T_n`, `n >= 12`: `n - 2` equations.
pub fn gen_t(n: usize) -> Result<System> {
    if n < 12 {
        return Err(Error::Precondition(format!("T_n needs n >= 12, got {n}")));
    }
    use Equation::{Product, Sum};
    let mut eqs: Vec<Equation> = squaring_chain(n - 12).collect();
    eqs.extend([
        Product(n - 10, n - 10, n - 10),
        Sum(n - 10, n - 10, n - 9),
        Sum(n - 8, n - 9, 1),
        Product(n - 8, n - 7, n - 11),
        Product(n - 10, n - 7, n - 7),
        Product(n - 6, n - 6, n - 5),
        Product(n - 4, n - 4, n - 3),
        Product(n - 2, n - 2, n - 1),
        Sum(n - 5, n - 3, n),
        Sum(n - 1, n, n - 11),
    ]);
    Ok(System::new(n, eqs))
}

/// The system `S_n`, `n >= 4`: `n - 1` equations.
pub fn gen_s(n: usize) -> Result<System> {
    if n < 4 {
        return Err(Error::Precondition(format!("S_n needs n >= 4, got {n}")));
    }
    use Equation::{Product, Successor};
    let mut eqs: Vec<Equation> = squaring_chain(n - 4).collect();
    eqs.extend([
        Successor(n - 2, 1),
        Successor(n - 1, n - 2),
        Product(n - 1, n, n - 3),
    ]);
    Ok(System::new(n, eqs))
}

fn canonical_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i..=n).map(move |j| (i, j)))
}

/// All canonical sum and product equations over `x1..xn`, in `Equation` order.
pub fn universe_e(n: usize) -> Vec<Equation> {
    let mut out: Vec<Equation> = canonical_pairs(n)
        .flat_map(|(i, j)| {
            (1..=n).flat_map(move |k| [Equation::Sum(i, j, k), Equation::Product(i, j, k)])
        })
        .collect();
    out.sort();
    out
}

/// All successor equations and all canonical product equations over `x1..xn`.
pub fn universe_u(n: usize) -> Vec<Equation> {
    let mut out: Vec<Equation> = canonical_pairs(n)
        .flat_map(|(i, j)| (1..=n).map(move |k| Equation::Product(i, j, k)))
        .chain((1..=n).flat_map(|i| (1..=n).map(move |k| Equation::Successor(i, k))))
        .collect();
    out.sort();
    out
}
