//! Number types shared by every module: exact rationals and doubles.
//!
//! Everything in the crate is generic over [`Scalar`]. Rational mode is exact
//! (tolerance zero); double mode compares with a fixed absolute tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used in the reference arithmetic mode.
pub type Rational = BigRational;

/// Absolute comparison tolerance in double mode.
pub const DOUBLE_TOLERANCE: f64 = 1e-9;

/// Normalization tolerance for probability vectors in double mode.
pub const DOUBLE_NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Rational,
    Double,
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arithmetic::Rational => f.write_str("rational"),
            Arithmetic::Double => f.write_str("double"),
        }
    }
}

impl FromStr for Arithmetic {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Arithmetic::Rational),
            "double" => Ok(Arithmetic::Double),
            other => Err(ParseScalarError(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse number: {0}")]
pub struct ParseScalarError(pub String);

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ARITHMETIC: Arithmetic;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Parses `"3/4"`, `"0.7"`, `"-2"` (and, in double mode, any float literal).
    fn parse_literal(s: &str) -> Result<Self, ParseScalarError>;
    fn to_f64(&self) -> f64;
    /// Zero in rational mode.
    fn tolerance() -> Self;
    fn normalization_tolerance() -> Self;
    fn is_exact_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// `self -= a * b` without intermediate clones where the type allows it.
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    fn total_cmp(&self, other: &Self) -> Ordering;

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    /// `self >= other` up to tolerance.
    fn approx_ge(&self, other: &Self) -> bool {
        self.clone() + Self::tolerance() >= *other
    }

    /// `self > other` by more than the tolerance.
    fn definitely_gt(&self, other: &Self) -> bool {
        self.clone() > other.clone() + Self::tolerance()
    }

    fn is_approx_zero(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_positive(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_negative(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x)
}

impl Scalar for Rational {
    const ARITHMETIC: Arithmetic = Arithmetic::Rational;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_literal(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Zero::zero()
    }

    fn normalization_tolerance() -> Self {
        Zero::zero()
    }

    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if Zero::is_zero(a) || Zero::is_zero(b) {
            return;
        }
        *self -= a * b;
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Scalar for f64 {
    const ARITHMETIC: Arithmetic = Arithmetic::Double;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_literal(s: &str) -> Result<Self, ParseScalarError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| ParseScalarError(s.to_string()))?;
            let d: f64 = d.trim().parse().map_err(|_| ParseScalarError(s.to_string()))?;
            if d == 0.0 {
                return Err(ParseScalarError(format!("{s}: zero denominator")));
            }
            return Ok(n / d);
        }
        let v: f64 = s.parse().map_err(|_| ParseScalarError(s.to_string()))?;
        if !v.is_finite() {
            return Err(ParseScalarError(format!("{s}: not finite")));
        }
        Ok(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        DOUBLE_TOLERANCE
    }

    fn normalization_tolerance() -> Self {
        DOUBLE_NORMALIZATION_TOLERANCE
    }

    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

/// Exact parse of integer, fraction and plain decimal literals.
fn parse_rational(raw: &str) -> Result<Rational, ParseScalarError> {
    let s = raw.trim();
    if s.is_empty() {
        return Err(ParseScalarError("empty literal".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if Zero::is_zero(&d) {
            return Err(ParseScalarError(format!("{s}: zero denominator")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| ParseScalarError(s.to_string()))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseScalarError(s.to_string()));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(ParseScalarError(s.to_string()));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| ParseScalarError(s.to_string()))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Parses a literal into whichever scalar type the caller works in.
pub fn parse<S: Scalar>(s: &str) -> Result<S, ParseScalarError> {
    S::parse_literal(s)
}

/// Shorthand used heavily in tests and fixtures.
pub fn q<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals_are_exact() {
        assert_eq!(parse::<Rational>("0.7").unwrap(), q(7, 10));
        assert_eq!(parse::<Rational>("3/4").unwrap(), q(3, 4));
        assert_eq!(parse::<Rational>("-2").unwrap(), q(-2, 1));
        assert_eq!(parse::<Rational>("1.5e2").unwrap(), q(150, 1));
        assert_eq!(parse::<Rational>("25e-3").unwrap(), q(1, 40));
        assert_eq!(parse::<Rational>(".5").unwrap(), q(1, 2));
        assert!(parse::<Rational>("1/0").is_err());
        assert!(parse::<Rational>("abc").is_err());
        assert!(parse::<Rational>("").is_err());
    }

    #[test]
    fn double_literals() {
        assert_eq!(parse::<f64>("1/4").unwrap(), 0.25);
        assert_eq!(parse::<f64>("0.7").unwrap(), 0.7);
        assert!(parse::<f64>("inf").is_err());
    }

    #[test]
    fn tolerant_comparisons() {
        let a = 0.7f64 + 0.5;
        assert!(a.approx_eq(&1.2));
        assert!(a.approx_ge(&1.2) && 1.2f64.approx_ge(&a));
        assert!(!a.definitely_gt(&1.2));
        let r: Rational = q(12, 10);
        assert!(r.approx_ge(&q(6, 5)));
        assert!(!r.definitely_gt(&q(6, 5)));
        assert!(Scalar::is_positive(&q::<Rational>(1, 1000000000000)));
    }

    #[test]
    fn sub_mul_assign_matches_plain_arithmetic() {
        let mut x: Rational = q(1, 2);
        x.sub_mul_assign(&q(1, 3), &q(3, 4));
        assert_eq!(x, q(1, 4));
    }
}
