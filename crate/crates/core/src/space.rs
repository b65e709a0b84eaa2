//! Index sets, truncation boxes and finitely supported coordinate vectors.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Scalar, ScalarMode};

/// A triple `(n, μ, ν)` of positive integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct IndexTriple {
    pub n: usize,
    pub mu: usize,
    pub nu: usize,
}

impl IndexTriple {
    pub fn new(n: usize, mu: usize, nu: usize) -> Result<Self> {
        if n == 0 || mu == 0 || nu == 0 {
            return Err(Error::Input(format!(
                "index triple ({n}, {mu}, {nu}) must have positive components"
            )));
        }
        Ok(IndexTriple { n, mu, nu })
    }

    /// `n + μ + ν`, the exponent of every weight attached to this index.
    pub fn weight_exponent(&self) -> u32 {
        (self.n + self.mu + self.nu) as u32
    }
}

impl TryFrom<[usize; 3]> for IndexTriple {
    type Error = Error;

    fn try_from([n, mu, nu]: [usize; 3]) -> Result<Self> {
        IndexTriple::new(n, mu, nu)
    }
}

impl From<IndexTriple> for [usize; 3] {
    fn from(t: IndexTriple) -> Self {
        [t.n, t.mu, t.nu]
    }
}

impl fmt::Display for IndexTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.mu, self.nu)
    }
}

/// Coordinate index: `1..=d` for singly indexed spaces, a triple otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Index {
    Single(usize),
    Triple(IndexTriple),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Single(i) => write!(f, "{i}"),
            Index::Triple(t) => t.fmt(f),
        }
    }
}

impl From<IndexTriple> for Index {
    fn from(t: IndexTriple) -> Self {
        Index::Triple(t)
    }
}

/// Finite stand-in for `ℕ` or `ℕ³`. Coordinates outside the box are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruncationBox {
    Linear { d: usize },
    Triple {
        n_max: usize,
        mu_max: usize,
        nu_max: usize,
    },
}

impl fmt::Display for TruncationBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationBox::Linear { d } => write!(f, "[1..{d}]"),
            TruncationBox::Triple {
                n_max,
                mu_max,
                nu_max,
            } => write!(f, "({n_max}, {mu_max}, {nu_max})"),
        }
    }
}

impl TruncationBox {
    pub fn linear(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("box dimension must be at least 1".into()));
        }
        Ok(TruncationBox::Linear { d })
    }

    pub fn triple(n_max: usize, mu_max: usize, nu_max: usize) -> Result<Self> {
        if n_max == 0 || mu_max == 0 || nu_max == 0 {
            return Err(Error::Input("box dimensions must be at least 1".into()));
        }
        Ok(TruncationBox::Triple {
            n_max,
            mu_max,
            nu_max,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TruncationBox::Linear { d } => Self::linear(d).map(|_| ()),
            TruncationBox::Triple {
                n_max,
                mu_max,
                nu_max,
            } => Self::triple(n_max, mu_max, nu_max).map(|_| ()),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            TruncationBox::Linear { d } => d,
            TruncationBox::Triple {
                n_max,
                mu_max,
                nu_max,
            } => n_max * mu_max * nu_max,
        }
    }

    fn domain_error(&self, index: &Index) -> Error {
        Error::Domain {
            index: index.to_string(),
            bounds: self.to_string(),
        }
    }

    /// Position of `index` in the dense coordinate order.
    pub fn flat(&self, index: &Index) -> Result<usize> {
        match (*self, index) {
            (TruncationBox::Linear { d }, Index::Single(i)) if (1..=d).contains(i) => Ok(i - 1),
            (
                TruncationBox::Triple {
                    n_max,
                    mu_max,
                    nu_max,
                },
                Index::Triple(t),
            ) if t.n <= n_max && t.mu <= mu_max && t.nu <= nu_max => {
                Ok(((t.n - 1) * mu_max + (t.mu - 1)) * nu_max + (t.nu - 1))
            }
            _ => Err(self.domain_error(index)),
        }
    }

    pub fn index_at(&self, flat: usize) -> Index {
        match *self {
            TruncationBox::Linear { .. } => Index::Single(flat + 1),
            TruncationBox::Triple { mu_max, nu_max, .. } => {
                let nu = flat % nu_max;
                let mu = (flat / nu_max) % mu_max;
                let n = flat / (nu_max * mu_max);
                Index::Triple(IndexTriple {
                    n: n + 1,
                    mu: mu + 1,
                    nu: nu + 1,
                })
            }
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = Index> + '_ {
        (0..self.dim()).map(|i| self.index_at(i))
    }

    pub fn triple_bounds(&self) -> Option<(usize, usize, usize)> {
        match *self {
            TruncationBox::Triple {
                n_max,
                mu_max,
                nu_max,
            } => Some((n_max, mu_max, nu_max)),
            TruncationBox::Linear { .. } => None,
        }
    }
}

/// A coordinate vector supported in a truncation box.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedVector<S: Scalar> {
    bx: TruncationBox,
    coords: Vec<S>,
}

impl<S: Scalar> TruncatedVector<S> {
    pub fn zeros(bx: TruncationBox) -> Self {
        TruncatedVector {
            bx,
            coords: vec![S::zero(); bx.dim()],
        }
    }

    pub fn unit(bx: TruncationBox, index: impl Into<Index>) -> Result<Self> {
        let mut v = Self::zeros(bx);
        v.set(index, S::one())?;
        Ok(v)
    }

    pub fn from_dense(bx: TruncationBox, coords: Vec<S>) -> Result<Self> {
        if coords.len() != bx.dim() {
            return Err(Error::Dimension {
                expected: bx.dim(),
                got: coords.len(),
            });
        }
        Ok(TruncatedVector { bx, coords })
    }

    pub fn from_entries(
        bx: TruncationBox,
        entries: impl IntoIterator<Item = (Index, S)>,
    ) -> Result<Self> {
        let mut v = Self::zeros(bx);
        for (i, x) in entries {
            let f = bx.flat(&i)?;
            v.coords[f] = v.coords[f].clone() + x;
        }
        Ok(v)
    }

    pub fn bx(&self) -> &TruncationBox {
        &self.bx
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn get(&self, index: impl Into<Index>) -> Result<&S> {
        let f = self.bx.flat(&index.into())?;
        Ok(&self.coords[f])
    }

    /// Coordinate lookup with the zero-outside-the-box convention.
    pub fn get_or_zero(&self, index: impl Into<Index>) -> S {
        self.bx
            .flat(&index.into())
            .map(|f| self.coords[f].clone())
            .unwrap_or_else(|_| S::zero())
    }

    pub fn set(&mut self, index: impl Into<Index>, value: S) -> Result<()> {
        let f = self.bx.flat(&index.into())?;
        self.coords[f] = value;
        Ok(())
    }

    /// Nonzero entries in coordinate order.
    pub fn support(&self) -> impl Iterator<Item = (Index, &S)> + '_ {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (self.bx.index_at(i), v))
    }

    fn same_box(&self, other: &Self) -> Result<()> {
        if self.bx != other.bx {
            return Err(Error::Input(format!(
                "vectors live in different boxes {} and {}",
                self.bx, other.bx
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        Ok(TruncatedVector {
            bx: self.bx,
            coords: linalg::add(&self.coords, &other.coords),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        Ok(TruncatedVector {
            bx: self.bx,
            coords: linalg::sub(&self.coords, &other.coords),
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        TruncatedVector {
            bx: self.bx,
            coords: linalg::scaled(c, &self.coords),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|v| v.is_zero())
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .support()
            .map(|(i, v)| json!({ "index": i, "value": v.to_json() }))
            .collect();
        json!({ "box": self.bx, "mode": S::MODE, "entries": entries })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bx: TruncationBox = serde_json::from_value(value["box"].clone())
            .map_err(|e| Error::schema(format!("box: {e}")))?;
        bx.validate()?;
        if let Some(mode) = value.get("mode") {
            let mode: ScalarMode = serde_json::from_value(mode.clone())
                .map_err(|e| Error::schema(format!("mode: {e}")))?;
            if mode != S::MODE {
                return Err(Error::schema(format!(
                    "vector stored in {mode} mode, expected {}",
                    S::MODE
                )));
            }
        }
        let entries = value["entries"]
            .as_array()
            .ok_or_else(|| Error::schema("entries must be an array"))?;
        let mut v = Self::zeros(bx);
        for e in entries {
            let index: Index = serde_json::from_value(e["index"].clone())
                .map_err(|err| Error::schema(format!("index: {err}")))?;
            let x = S::from_json(&e["value"])?;
            v.set(index, x)?;
        }
        Ok(v)
    }
}

impl<S: Scalar> Serialize for TruncatedVector<S> {
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.to_json().serialize(ser)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for TruncatedVector<S> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(de)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn flat_index_roundtrip() {
        let bx = TruncationBox::triple(4, 3, 2).unwrap();
        for f in 0..bx.dim() {
            assert_eq!(bx.flat(&bx.index_at(f)).unwrap(), f);
        }
        let t = IndexTriple::new(2, 3, 1).unwrap();
        assert_eq!(bx.index_at(bx.flat(&t.into()).unwrap()), Index::Triple(t));
    }

    #[test]
    fn out_of_box_index_is_a_domain_error() {
        let bx = TruncationBox::triple(2, 2, 2).unwrap();
        let err = TruncatedVector::<BigRational>::unit(bx, IndexTriple::new(3, 1, 1).unwrap());
        assert!(matches!(err, Err(Error::Domain { .. })));
        let lin = TruncationBox::linear(3).unwrap();
        assert!(lin.flat(&Index::Single(0)).is_err());
        assert!(lin.flat(&Index::Single(4)).is_err());
        assert!(IndexTriple::new(0, 1, 1).is_err());
    }

    #[test]
    fn json_schema_uses_index_arrays() {
        let bx = TruncationBox::triple(3, 3, 3).unwrap();
        let mut v = TruncatedVector::<BigRational>::zeros(bx);
        v.set(IndexTriple::new(1, 2, 2).unwrap(), BigRational::from_ratio(1, 4))
            .unwrap();
        let j = v.to_json();
        assert_eq!(j["entries"][0]["index"], json!([1, 2, 2]));
        assert_eq!(j["entries"][0]["value"], json!({"num": 1, "den": 4}));
        assert_eq!(j["box"], json!({"n_max": 3, "mu_max": 3, "nu_max": 3}));
        assert_eq!(TruncatedVector::from_json(&j).unwrap(), v);
        assert!(TruncatedVector::<f64>::from_json(&j).is_err());
    }
}
