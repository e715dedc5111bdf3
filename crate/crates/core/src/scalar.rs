//! Exact scalar types used by the linear-arithmetic core.
//!
//! The analyzer needs an ordered field with exact division; floating point
//! does not qualify (strict inequalities and equality tests would drift).
//! [`Scalar`] is implemented for arbitrary-precision rationals and for
//! `i64`-backed rationals. The latter is faster but panics on overflow, so
//! the command-line front end always uses [`crate::Rational`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};

/// An exact ordered field element.
pub trait Scalar: Clone + Ord + Hash + Debug + Display + num_traits::Num + Signed + Send + Sync + 'static {
    /// Converts from the data model's number type, if representable.
    fn from_rational(value: &BigRational) -> Option<Self>;

    fn to_rational(&self) -> BigRational;

    fn from_i64(value: i64) -> Self;

    fn floor(&self) -> Self;

    fn ceil(&self) -> Self;

    fn is_integral(&self) -> bool;
}

impl Scalar for BigRational {
    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(value.clone())
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn ceil(&self) -> Self {
        BigRational::ceil(self)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

impl Scalar for Rational64 {
    fn from_rational(value: &BigRational) -> Option<Self> {
        let numer = value.numer().to_i64()?;
        let denom = value.denom().to_i64()?;
        Some(Rational64::new(numer, denom))
    }

    fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn from_i64(value: i64) -> Self {
        Rational64::from_integer(value)
    }

    fn floor(&self) -> Self {
        Rational64::floor(self)
    }

    fn ceil(&self) -> Self {
        Rational64::ceil(self)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

/// Renders an exact rational: integers plainly, terminating fractions as
/// decimals, anything else as `p/q`.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    match terminating_decimal(value) {
        Some(text) => text,
        None => format!("{}/{}", value.numer(), value.denom()),
    }
}

fn terminating_decimal(value: &BigRational) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1) {
        return None;
    }
    let digits = twos.max(fives);
    let scale = BigInt::from(10).pow(digits);
    let scaled = (value * BigRational::from_integer(scale)).to_integer();
    let negative = scaled.is_negative();
    let mut text = scaled.abs().to_string();
    let width = digits as usize + 1;
    if text.len() < width {
        text = format!("{}{}", "0".repeat(width - text.len()), text);
    }
    let split = text.len() - digits as usize;
    let (int_part, frac_part) = text.split_at(split);
    Some(format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac_part))
}

/// Parses a decimal literal (`-12`, `0.25`, `.5`) or an exact fraction
/// (`1/3`) into a rational. Returns `None` for anything else.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = parse_decimal(numer)?;
        let denom = parse_decimal(denom)?;
        if denom.is_zero() {
            return None;
        }
        return Some(numer / denom);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    let value = BigRational::new(numer, denom);
    Some(if negative { -value } else { value })
}
