//! Exact rational arithmetic helpers.
//!
//! Every probability and payoff in this crate is a [`Rational`]
//! (arbitrary-precision `num::BigRational`). Frontier vertices are rational
//! functions of the inputs, so carrying exact values end to end lets tests
//! assert bit-exact equality instead of tolerances. The only deliberately
//! non-rational quantities in the crate are the square-root expressions in
//! [`crate::tau_design`], which are documented as `f64`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

/// Shorthand for small rational constants: `rat(2, 5)` is `2/5`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    rat(1, 2)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite double into a rational (doubles are dyadic).
pub fn from_f64(value: f64) -> Result<Rational, Error> {
    Rational::from_float(value)
        .ok_or_else(|| Error::domain("rational", format!("{value} is not finite")))
}

/// Parses `"a/b"`, integer, and decimal forms exactly.
///
/// Decimal strings are read as exact decimal fractions (`"0.4"` is `4/10`),
/// never through floating point. A trailing exponent is honored
/// (`"1e-6"` is `1/1000000`).
pub fn parse_rational(input: &str) -> Result<Rational, Error> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::domain("rational", "empty string"));
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n: BigInt = numer
            .trim()
            .parse()
            .map_err(|_| Error::domain("rational", format!("bad numerator in {input:?}")))?;
        let d: BigInt = denom
            .trim()
            .parse()
            .map_err(|_| Error::domain("rational", format!("bad denominator in {input:?}")))?;
        if d.is_zero() {
            return Err(Error::domain("rational", format!("zero denominator in {input:?}")));
        }
        return Ok(Rational::new(n, d));
    }

    let (mantissa, exponent) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e
                .parse()
                .map_err(|_| Error::domain("rational", format!("bad exponent in {input:?}")))?;
            (m, exp)
        }
        None => (s, 0),
    };

    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::domain("rational", format!("no digits in {input:?}")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::domain("rational", format!("bad digits in {input:?}")));
    }

    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined
            .parse()
            .map_err(|_| Error::domain("rational", format!("bad digits in {input:?}")))?
    };
    let scale = frac_part.len() as i32 - exponent;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::new(numer, ten.pow(scale as u32))
    } else {
        Rational::from(numer * ten.pow((-scale) as u32))
    };
    Ok(if sign < 0 { -value } else { value })
}

/// Canonical text form: `"0"`, `"-1/5"`, `"2/5"`. Parses back exactly.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && value <= &one()
}
