//! Exact scalars.
//!
//! [`Rational`] is an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Text form is `num/den`, or just `num` when the
//! denominator is one.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `n`, `-n` or `n/d`. A zero denominator is a [`Error::Value`].
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Value(format!("not a rational number: {text:?}"));
    match text.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::Value(format!("zero denominator in {text:?}")));
            }
            Ok(Rational::new(num, den))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational image of a finite float.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_integral(value: &Rational) -> bool {
    value.denom().is_one()
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

/// Serde adapter writing rationals as `"num/den"` strings and accepting
/// either strings or JSON integers.
pub mod serde_str {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        from_json(&raw).map_err(de::Error::custom)
    }

    pub(crate) fn from_json(raw: &serde_json::Value) -> std::result::Result<Rational, String> {
        match raw {
            serde_json::Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(int(i))
                } else if let Some(u) = n.as_u64() {
                    Ok(Rational::from_integer(BigInt::from(u)))
                } else {
                    Err(format!("non-integer JSON number {n}; use a \"num/den\" string"))
                }
            }
            other => Err(format!("expected integer or \"num/den\" string, found {other}")),
        }
    }
}

pub mod serde_str_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format_rational(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        raw.iter()
            .map(|v| serde_str::from_json(v).map_err(de::Error::custom))
            .collect()
    }
}
