//! JSON wire formats shared by the library and the command line.
//!
//! Tensors serialize as `{"dim": 3, "order": 2, "entries": ["1", "-2/3", …]}`
//! with rationals as `"p"` or `"p/q"` strings in row-major order.

use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};
use crate::tensor::DenseTensor;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<String>,
}

impl From<&DenseTensor> for TensorJson {
    fn from(t: &DenseTensor) -> Self {
        TensorJson {
            dim: t.dim(),
            order: t.order(),
            entries: t.entries().iter().map(rational::format).collect(),
        }
    }
}

impl TryFrom<&TensorJson> for DenseTensor {
    type Error = Error;

    fn try_from(j: &TensorJson) -> Result<Self> {
        let entries = parse_rationals(&j.entries)?;
        DenseTensor::from_entries(j.dim, j.order, entries)
    }
}

impl Serialize for DenseTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(d)?;
        DenseTensor::try_from(&j).map_err(serde::de::Error::custom)
    }
}

pub fn parse_rationals(values: &[String]) -> Result<Vec<Rational>> {
    values.iter().map(|s| rational::parse(s)).collect()
}

pub fn format_rationals(values: &[Rational]) -> Vec<String> {
    values.iter().map(rational::format).collect()
}

pub fn tensor_from_str(text: &str) -> Result<DenseTensor> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}
