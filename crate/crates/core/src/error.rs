use num_bigint::BigUint;
use thiserror::Error;

use crate::numtheory::Factorization;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: variable index {index} out of range 1..={var_count}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        var_count: usize,
    },

    #[error("missing `vars <n>` line")]
    MissingVarCount,

    #[error("tuple has {got} entries, system has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("node budget of {limit} steps exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("factorization incomplete: composite cofactor {} remains", .cofactors.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))]
    FactorizationIncomplete {
        partial: Factorization,
        cofactors: Vec<BigUint>,
    },

    #[error("r_3 argument {0} is neither small nor an odd perfect square after removing factors of 4")]
    UnsupportedShape(BigUint),

    #[error("factor table line {line}: {message}")]
    FactorTable { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
