//! Exact rationals: parsing, `p/q` formatting and sign helpers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational used throughout the crate.
pub type Rational = BigRational;

/// Shorthand constructor for small literals.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `base^exp` with the convention `0^0 = 1`.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    let exp = i32::try_from(exp).expect("exponent exceeds i32::MAX");
    base.pow(exp)
}

/// Canonical `p/q` rendering. Integers are written as `p/1` so every
/// value has the same shape.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent out of range in `{0}`")]
    ExponentRange(String),
}

/// Parses `p/q`, plain integers and decimals (optionally with an
/// exponent, e.g. `-0.25` or `1e-12`). Decimals are read exactly as
/// fractions over powers of ten.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim(), s)?;
        let den = parse_decimal(den.trim(), s)?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(num / den);
    }
    parse_decimal(s, s)
}

fn parse_decimal(s: &str, whole: &str) -> Result<Rational, ParseRationalError> {
    let invalid = || ParseRationalError::Invalid(whole.to_string());
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => {
            let exp: i32 = s[idx + 1..].parse().map_err(|_| invalid())?;
            (&s[..idx], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = all_digits.parse().map_err(|_| invalid())?;
    let scale = i64::from(exponent) - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(ParseRationalError::ExponentRange(whole.to_string()));
    }
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Exact sign of a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn of(value: &Rational) -> Sign {
        if value.is_positive() {
            Sign::Plus
        } else if value.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Zero => '0',
            Sign::Plus => '+',
        }
    }

    pub fn from_symbol(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Minus),
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Plus),
            _ => None,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Plus,
            _ => Sign::Minus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Newtype giving `Rational` a `p/q` string form for serde and CLI use.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Rational);

impl FromStr for Exact {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Exact)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl serde::Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> serde::Deserialize<'de> for Exact {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map(Exact).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::rational::serde_str")]` for bare `Rational` fields.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: serde::Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Same as [`serde_str`] for `Option<Rational>`.
pub mod serde_opt_str {
    use super::*;

    pub fn serialize<S: serde::Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => serializer.serialize_some(&format_rational(v)),
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
        let s = <Option<String> as serde::Deserialize>::deserialize(deserializer)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Same as [`serde_str`] for `Vec<Rational>`.
pub mod serde_vec_str {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: serde::Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format_rational(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational>, D::Error> {
        let raw = <Vec<String> as serde::Deserialize>::deserialize(deserializer)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Arithmetic on long rationals. `Ratio`'s operators reduce through
/// `num-bigint`'s binary gcd, which is quadratic in the longer operand even
/// when the other is short; these route the gcd through a remainder step or
/// through dashu. Results are in lowest terms, same as `Ratio`'s.
pub mod big {
    use dashu_int::ops::Gcd;
    use dashu_int::UBig;
    use num_bigint::{BigInt, Sign as BigSign};
    use num_integer::Integer;
    use num_traits::{Signed, Zero};

    use super::Rational;

    const SHORT_BITS: u64 = 2048;

    /// Non-negative gcd.
    pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
        let (long, short) = if a.bits() >= b.bits() { (a, b) } else { (b, a) };
        if long.bits() < SHORT_BITS || short.is_zero() {
            return long.gcd(short);
        }
        if short.bits() < SHORT_BITS {
            return short.gcd(&(long % short));
        }
        let to_ubig = |x: &BigInt| UBig::from_le_bytes(&x.to_bytes_le().1);
        let g = to_ubig(a).gcd(&to_ubig(b));
        BigInt::from_bytes_le(BigSign::Plus, &g.to_le_bytes())
    }

    /// `numer/denom` in lowest terms; `denom ≠ 0`.
    pub fn reduced(numer: BigInt, denom: BigInt) -> Rational {
        let g = gcd(&numer, &denom);
        let (numer, denom) = (numer / &g, denom / &g);
        if denom.is_negative() {
            Rational::new_raw(-numer, -denom)
        } else {
            Rational::new_raw(numer, denom)
        }
    }

    pub fn add(a: &Rational, b: &Rational) -> Rational {
        let g = gcd(a.denom(), b.denom());
        let (a_rest, b_rest) = (a.denom() / &g, b.denom() / &g);
        let numer = a.numer() * &b_rest + b.numer() * &a_rest;
        if numer.is_zero() {
            return Rational::zero();
        }
        // the new numerator is coprime to a_rest and b_rest already
        let h = gcd(&numer, &g);
        Rational::new_raw(numer / &h, a.denom() / &h * b_rest)
    }

    pub fn sub(a: &Rational, b: &Rational) -> Rational {
        add(a, &-b)
    }

    pub fn mul(a: &Rational, b: &Rational) -> Rational {
        if a.is_zero() || b.is_zero() {
            return Rational::zero();
        }
        let g1 = gcd(a.numer(), b.denom());
        let g2 = gcd(a.denom(), b.numer());
        let numer = (a.numer() / &g1) * (b.numer() / &g2);
        let denom = (a.denom() / &g2) * (b.denom() / &g1);
        if denom.is_negative() {
            Rational::new_raw(-numer, -denom)
        } else {
            Rational::new_raw(numer, denom)
        }
    }

    /// Panics when `b` is zero.
    pub fn div(a: &Rational, b: &Rational) -> Rational {
        mul(a, &b.recip())
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Rational {
        values.into_iter().fold(Rational::zero(), |acc, v| add(&acc, v))
    }
}
