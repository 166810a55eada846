//! Numeric layer shared by every solver.
//!
//! All algorithms are generic over [`Scalar`], implemented for exact
//! arbitrary-precision rationals and for `f64`. Games always store their
//! probabilities as [`Rational`]; float-mode games store the exact binary value
//! of each `f64`, so converting back is lossless.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = num_rational::BigRational;

/// Field operations needed by the simplex, the linear solver and the
/// value-iteration sweeps.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact rational value of `self` (for `f64`: its binary expansion).
    fn to_rational(&self) -> Rational;
    /// Pivot and comparison tolerance; zero for exact arithmetic.
    fn eps() -> Self;

    fn is_pos(&self) -> bool {
        *self > Self::eps()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::eps()
    }

    fn approx_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn magnitude(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn eps() -> Self {
        Zero::zero()
    }

    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }

    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }

    fn approx_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).expect("finite float")
    }

    fn eps() -> Self {
        1e-12
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a plain decimal literal such as `"0.125"`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').ok_or_else(bad)?;
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Closest rational to `x` whose denominator does not exceed `max_den`
/// (continued-fraction convergents and semiconvergents; ties go to the
/// convergent).
pub fn limit_denominator(x: &Rational, max_den: u64) -> Rational {
    assert!(max_den >= 1, "denominator bound must be positive");
    let max = BigInt::from(max_den);
    if *x.denom() <= max {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > max {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (&max - &q0).div_floor(&q1);
    let semi = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = Rational::new(p1, q1);
    if (&semi - x).abs() < (&conv - x).abs() {
        semi
    } else {
        conv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn formats_compactly() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&int(1)), "1");
        assert_eq!(format_rational(&int(0)), "0");
    }

    #[test]
    fn limit_denominator_matches_known_approximations() {
        let pi = Rational::from_float(std::f64::consts::PI).unwrap();
        assert_eq!(limit_denominator(&pi, 10), rat(22, 7));
        assert_eq!(limit_denominator(&pi, 100), rat(311, 99));
        assert_eq!(limit_denominator(&pi, 1000), rat(355, 113));
        let near_one = Rational::from_float(1.0 - 3.2e-5).unwrap();
        assert_eq!(limit_denominator(&near_one, 64), int(1));
        let third = Rational::from_float(1.0 / 3.0).unwrap();
        assert_eq!(limit_denominator(&third, 64), rat(1, 3));
        assert_eq!(limit_denominator(&rat(3, 7), 64), rat(3, 7));
    }

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1f64;
        assert_eq!(<f64 as Scalar>::from_rational(&x.to_rational()), x);
        assert!(x.to_rational() != rat(1, 10));
    }
}
