//! Exact rationals and their textual forms.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalError {
    Malformed(String),
    ZeroDenominator,
}

impl fmt::Display for RationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalError::Malformed(s) => write!(f, "malformed rational literal `{s}`"),
            RationalError::ZeroDenominator => f.write_str("zero denominator"),
        }
    }
}

impl std::error::Error for RationalError {}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= one()
}

fn parse_int(s: &str) -> Result<BigInt, RationalError> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RationalError::Malformed(s.to_string()));
    }
    s.parse::<BigInt>()
        .map_err(|_| RationalError::Malformed(s.to_string()))
}

/// Parses `int`, `int/int` or a decimal literal such as `0.25` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num.trim())?;
        let den = parse_int(den.trim())?;
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RationalError::Malformed(s.to_string()));
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.strip_prefix(['-', '+']).unwrap_or(whole);
        if whole_digits.is_empty() || !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RationalError::Malformed(s.to_string()));
        }
        let mantissa: BigInt = format!("{whole_digits}{frac}")
            .parse()
            .map_err(|_| RationalError::Malformed(s.to_string()))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    Ok(Rational::from_integer(parse_int(s)?))
}

/// Renders `p/q`, or `p` when the denominator is one. Never a decimal.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}
