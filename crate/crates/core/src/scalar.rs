//! Numeric backends shared by quaternions, matrices and spectral data.
//!
//! Two implementations exist: [`Rational`] (exact, authoritative) and `f64`
//! (feeds quadrature and the float shadow of every exact check).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    /// `self += a * b` without cloning the operands.
    fn add_product(&mut self, a: &Self, b: &Self);

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        int(v)
    }
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

/// Float value of a rational, robust to numerators/denominators beyond f64 range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 900;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(f64::INFINITY)
}

/// Serde wrapper writing a rational as `[num, den]`.
///
/// Integers that do not fit in an `i64` are written as decimal strings; both
/// forms are accepted on input.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalJson(pub Rational);

fn bigint_to_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(small) => serde_json::Value::from(small),
        None => serde_json::Value::String(v.to_string()),
    }
}

fn bigint_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl Serialize for RationalJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&bigint_to_json(self.0.numer()))?;
        tup.serialize_element(&bigint_to_json(self.0.denom()))?;
        tup.end()
    }
}

impl<'de> Deserialize<'de> for RationalJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        rational_from_json(&value).map(RationalJson).map_err(de::Error::custom)
    }
}

/// Parses `[num, den]`, a bare integer, or a decimal-string integer.
pub fn rational_from_json(value: &serde_json::Value) -> Result<Rational, String> {
    match value {
        serde_json::Value::Array(pair) if pair.len() == 2 => {
            let n = bigint_from_json(&pair[0]).ok_or("bad numerator")?;
            let d = bigint_from_json(&pair[1]).ok_or("bad denominator")?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Rational::new(n, d))
        }
        other => bigint_from_json(other)
            .map(Rational::from_integer)
            .ok_or_else(|| format!("expected [num, den], got {other}")),
    }
}

pub fn rational_to_json(r: &Rational) -> serde_json::Value {
    serde_json::Value::Array(vec![bigint_to_json(r.numer()), bigint_to_json(r.denom())])
}

/// JSON encoding for either backend: `[num, den]` when exact, a number when float.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> serde_json::Value;
    fn from_json(value: &serde_json::Value) -> Result<Self, String>;
}

impl JsonScalar for Rational {
    fn to_json(&self) -> serde_json::Value {
        rational_to_json(self)
    }
    fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        rational_from_json(value)
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
    fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        match value {
            serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| "bad number".to_string()),
            other => rational_from_json(other).map(|r| rational_to_f64(&r)),
        }
    }
}
