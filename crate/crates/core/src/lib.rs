//! Integer solution counts for the B, T and S families of Diophantine
//! systems built from `x_i + x_j = x_k`, `x_i * x_j = x_k` and `x_i + 1 = x_k`.
//!
//! The crate pairs closed-form counts (divisor sums, sums of squares) with an
//! exhaustive interval-propagation box solver, so every formula can be checked
//! against direct enumeration at small sizes.

pub mod boxsolver;
pub mod census;
pub mod eqdsl;
mod error;
pub mod explorer;
pub mod families;
pub mod numtheory;
pub mod reduction;

pub use error::{Error, Result};
