//! Arbitrary-precision number theory: primality, factorization, divisor sums
//! and sums-of-squares counts.

mod decimal;
mod factor;
mod primes;
mod squares;
mod table;

pub use decimal::decimal_approx;
pub use factor::{factorize, split_two, Factorization, Factorizer, DEFAULT_RHO_BUDGET};
pub use primes::{is_prime, is_prime_u64, TRIAL_LIMIT};
pub use squares::{
    r3_exact, r3_odd_square, r3_of_power, r4, rk_bruteforce, rk_bruteforce_with_limit, rk_table,
    sigma, RK_LIMIT_LARGE_K, RK_LIMIT_SMALL_K,
};
pub use table::{load_factor_table, parse_factor_table, FactorTable};

/// Natural numbers of unbounded size.
pub type Natural = num_bigint::BigUint;
