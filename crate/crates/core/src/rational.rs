//! Helpers for the exact rational numbers used throughout the crate.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parses a decimal literal (`0.6`, `1`, `.25`, `10.`) into an exact rational.
///
/// Returns `None` for anything that is not plain digits with at most one dot.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(numer, denom))
}

pub fn from_u64(value: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Exact conversion of a finite float. Non-finite input maps to zero.
pub fn from_f64(value: f64) -> BigRational {
    BigRational::from_float(value).unwrap_or_else(BigRational::zero)
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `n/d` rendering, with integers printed bare (`0`, `1`).
pub fn format_exact(value: &BigRational) -> String {
    value.to_string()
}

/// Fixed-point rendering with `places` digits after the dot, rounded half away
/// from zero.
pub fn format_decimal(value: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = value * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Parses either `n/d`, an integer, or a decimal literal.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    match text.strip_prefix('-') {
        Some(rest) => parse_decimal(rest).map(|r| -r),
        None => parse_decimal(text),
    }
}

/// `floor(p * 2^64)` for `p` in `[0, 1]`, used as a comparison threshold for
/// uniformly drawn 64-bit words. `p = 1` yields `2^64`, which every word is
/// below.
pub fn u64_threshold(p: &BigRational) -> u128 {
    let scaled = p * BigRational::from_integer(BigInt::one() << 64);
    let floor = scaled.floor().to_integer();
    match floor.to_biguint() {
        Some(v) if v > BigUint::one() << 64 => 1u128 << 64,
        Some(v) => v.to_u128().unwrap_or(0),
        None => 0,
    }
}
