use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

fn pow10(e: u64) -> BigUint {
    BigUint::from(10u32).pow(e as u32)
}

/// `num / den` in scientific notation with `sig_digits` significant digits,
/// rounded half to even: `8.24742e-1`, `1.00e0`.
pub fn decimal_approx(num: &BigUint, den: &BigUint, sig_digits: u32) -> String {
    assert!(!den.is_zero(), "denominator must be positive");
    assert!(sig_digits >= 1, "need at least one digit");
    if num.is_zero() {
        let zeros = "0".repeat(sig_digits as usize - 1);
        return if zeros.is_empty() {
            "0e0".into()
        } else {
            format!("0.{zeros}e0")
        };
    }
    // exponent e with 10^e <= num/den < 10^(e+1)
    let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
    let at_least = |e: i64| -> bool {
        if e >= 0 {
            *num >= den * pow10(e as u64)
        } else {
            num * pow10((-e) as u64) >= *den
        }
    };
    while !at_least(exp) {
        exp -= 1;
    }
    while at_least(exp + 1) {
        exp += 1;
    }
    // scaled = num / den * 10^(sig - 1 - exp)
    let shift = sig_digits as i64 - 1 - exp;
    let (n, d) = if shift >= 0 {
        (num * pow10(shift as u64), den.clone())
    } else {
        (num.clone(), den * pow10((-shift) as u64))
    };
    let (mut q, r) = n.div_rem(&d);
    let twice = &r * 2u32;
    if twice > d || (twice == d && q.is_odd()) {
        q += BigUint::one();
    }
    if q == pow10(sig_digits as u64) {
        q /= 10u32;
        exp += 1;
    }
    let digits = q.to_string();
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        format!("{head}e{exp}")
    } else {
        format!("{head}.{tail}e{exp}")
    }
}
