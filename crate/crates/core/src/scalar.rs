//! Scalar types.
//!
//! Everything that decides an aggregation outcome (thresholds, ties, feasibility)
//! is computed in [`Rational`]. Probability mass in the histogram recursion and
//! the Monte Carlo estimators is generic over [`Probability`], which is
//! implemented for `f32`, `f64` and [`Rational`].

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision fraction, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for `num/den` as a [`Rational`].
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"num/den"`, an integer, or a decimal string such as `"0.04"` or `"-1.5e-2"`.
///
/// Decimal input is converted exactly: `"0.1"` is `1/10`, never the nearest binary float.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = |reason: &str| Error::invalid("rational", format!("{s:?}: {reason}"));
    if s.is_empty() {
        return Err(bad("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad("bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad("no digits"));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("not a number"));
    }
    let joined = format!("{whole}{frac}");
    let mut value = Rational::from_integer(joined.parse::<BigInt>().map_err(|_| bad("not a number"))?);
    let scale = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Ok(if negative { -value } else { value })
}

/// Canonical `num/den` rendering (`"3"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A probability-like scalar the histogram recursion can accumulate.
///
/// Only non-negative values ever flow through it, so floating implementations
/// carry a relative error of at most about `(n + 1) * m * EPSILON` after `n`
/// convolution steps over `m` judgements.
pub trait Probability:
    Clone + Debug + Send + Sync + Zero + One + Add<Output = Self> + AddAssign + Mul<Output = Self> + PartialOrd
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `self += a * b`, reusing storage where the type allows it.
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a.clone() * b.clone();
    }
}

impl Probability for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Probability for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r) as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    #[inline]
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Probability for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }
}

/// `true` when `0 <= r <= 1`.
pub(crate) fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("1/4").unwrap(), rat(1, 4));
        assert_eq!(parse_rational(" 2/8 ").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("0.04").unwrap(), rat(1, 25));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-1.5e-2").unwrap(), rat(-3, 200));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("2e3").unwrap(), int(2000));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "abc", "1.2.3", "0x10", "1/", "."] {
            assert!(parse_rational(s).is_err(), "{s} should fail");
        }
    }

    #[test]
    fn lowest_terms_and_sign_normalized() {
        let r = Rational::new(BigInt::from(6), BigInt::from(-8));
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(format_rational(&r), "-3/4");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn rational_addition_is_exact() {
        let sum = rat(1, 3) + rat(1, 6);
        assert_eq!(sum, rat(1, 2));
        let mut acc = Rational::zero();
        for _ in 0..10 {
            acc += rat(1, 10);
        }
        assert_eq!(acc, Rational::one());
    }
}
