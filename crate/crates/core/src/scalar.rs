//! Scalar fields used by every computation: exact rationals and binary64.
//!
//! A single computation never mixes the two; every container in this crate is
//! generic over one [`Scalar`] type.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Relative tolerance for equality of sums in float mode.
pub const FLOAT_EQ_TOL: f64 = 1e-12;
/// Tolerance for rank decisions in float mode.
pub const FLOAT_RANK_TOL: f64 = 1e-9;
/// Multiplicative safety margin applied to certified upper bounds in float mode.
pub const FLOAT_SAFETY: f64 = 1.0 + 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Rational,
    Float,
}

impl Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarMode::Rational => f.write_str("rational"),
            ScalarMode::Float => f.write_str("float"),
        }
    }
}

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test used for pivoting and rank decisions, relative to `scale`.
    fn is_negligible(&self, scale: &Self) -> bool;

    /// `self == other`, exactly or within [`FLOAT_EQ_TOL`] relative.
    fn approx_eq(&self, other: &Self) -> bool;

    /// `self <= other`, exactly or with [`FLOAT_EQ_TOL`] relative slack.
    fn leq(&self, other: &Self) -> bool;

    /// Smallest integer `>= self`. `None` for negative or non-finite values.
    fn ceil_u64(&self) -> Option<u64>;

    /// Inflate an upper bound that was computed in inexact arithmetic.
    fn certify_upper(self) -> Self;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self>;

    fn pow(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("integer fits the scalar field")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::Rational;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn leq(&self, other: &Self) -> bool {
        self <= other
    }

    fn ceil_u64(&self) -> Option<u64> {
        if self.is_negative() {
            return None;
        }
        self.ceil().to_integer().to_u64()
    }

    fn certify_upper(self) -> Self {
        self
    }

    fn to_json(&self) -> Value {
        fn int(v: &BigInt) -> Value {
            match v.to_i64() {
                Some(small) => Value::from(small),
                None => Value::String(v.to_string()),
            }
        }
        serde_json::json!({ "num": int(self.numer()), "den": int(self.denom()) })
    }

    fn from_json(value: &Value) -> Result<Self> {
        fn int(v: Option<&Value>) -> Result<BigInt> {
            match v {
                Some(Value::Number(n)) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| Error::schema(format!("non-integer rational component {n}"))),
                Some(Value::String(s)) => s
                    .parse::<BigInt>()
                    .map_err(|e| Error::schema(format!("bad integer {s:?}: {e}"))),
                other => Err(Error::schema(format!("expected integer, got {other:?}"))),
            }
        }
        match value {
            Value::Object(map) => {
                let num = int(map.get("num"))?;
                let den = int(map.get("den"))?;
                if den.is_zero() {
                    return Err(Error::schema("rational with zero denominator"));
                }
                Ok(BigRational::new(num, den))
            }
            Value::Number(n) => n
                .as_i64()
                .map(|v| BigRational::from_integer(v.into()))
                .ok_or_else(|| Error::schema(format!("{n} is not an exact integer"))),
            other => Err(Error::schema(format!("expected rational, got {other}"))),
        }
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: &Self) -> bool {
        self.abs() <= FLOAT_RANK_TOL * scale.abs().max(1.0)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = self.abs().max(other.abs());
        (self - other).abs() <= FLOAT_EQ_TOL * scale || self == other
    }

    fn leq(&self, other: &Self) -> bool {
        *self <= *other || self.approx_eq(other)
    }

    fn ceil_u64(&self) -> Option<u64> {
        if !self.is_finite() || *self < 0.0 {
            return None;
        }
        // Guard against 2.0000000000000004 style noise pushing the ceiling up.
        let rounded = self.round();
        if (self - rounded).abs() <= FLOAT_EQ_TOL * rounded.max(1.0) {
            return Some(rounded as u64);
        }
        Some(self.ceil() as u64)
    }

    fn certify_upper(self) -> Self {
        self * FLOAT_SAFETY
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::schema(format!("{n} is not representable"))),
            Value::Object(_) => BigRational::from_json(value).map(|r| Scalar::to_f64(&r)),
            other => Err(Error::schema(format!("expected number, got {other}"))),
        }
    }
}

/// Serde adapters for fields holding scalars, usable with `#[serde(with = ...)]`.
pub mod serde_scalar {
    use super::Scalar;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Scalar, Z: Serializer>(v: &S, ser: Z) -> Result<Z::Ok, Z::Error> {
        v.to_json().serialize(ser)
    }

    pub fn deserialize<'de, S: Scalar, D: Deserializer<'de>>(de: D) -> Result<S, D::Error> {
        let v = Value::deserialize(de)?;
        S::from_json(&v).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Scalar, Z: Serializer>(v: &[S], ser: Z) -> Result<Z::Ok, Z::Error> {
            v.iter().map(Scalar::to_json).collect::<Vec<_>>().serialize(ser)
        }

        pub fn deserialize<'de, S: Scalar, D: Deserializer<'de>>(
            de: D,
        ) -> Result<Vec<S>, D::Error> {
            let v = Vec::<Value>::deserialize(de)?;
            v.iter()
                .map(|x| S::from_json(x).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod vec2 {
        use super::*;

        pub fn serialize<S: Scalar, Z: Serializer>(
            v: &[Vec<S>],
            ser: Z,
        ) -> Result<Z::Ok, Z::Error> {
            v.iter()
                .map(|row| row.iter().map(Scalar::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(ser)
        }

        pub fn deserialize<'de, S: Scalar, D: Deserializer<'de>>(
            de: D,
        ) -> Result<Vec<Vec<S>>, D::Error> {
            let v = Vec::<Vec<Value>>::deserialize(de)?;
            v.iter()
                .map(|row| {
                    row.iter()
                        .map(|x| S::from_json(x).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Scalar, Z: Serializer>(
            v: &Option<S>,
            ser: Z,
        ) -> Result<Z::Ok, Z::Error> {
            v.as_ref().map(Scalar::to_json).serialize(ser)
        }

        pub fn deserialize<'de, S: Scalar, D: Deserializer<'de>>(
            de: D,
        ) -> Result<Option<S>, D::Error> {
            let v = Option::<Value>::deserialize(de)?;
            v.map(|x| S::from_json(&x).map_err(D::Error::custom))
                .transpose()
        }
    }
}
