//! On-disk instance format.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use steinitz_core::{Gauge, Vector, VectorFamily};

/// `{"p": 2}` or `{"p": "inf"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeSpec {
    pub p: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(String),
}

impl GaugeSpec {
    pub fn from_gauge(g: Gauge) -> Self {
        let p = match g {
            Gauge::Infinity => Exponent::Named("inf".into()),
            other => Exponent::Finite(other.exponent()),
        };
        Self { p }
    }

    pub fn to_gauge(&self) -> Result<Gauge> {
        match &self.p {
            Exponent::Named(s) => parse_gauge(s),
            Exponent::Finite(p) if *p == 2.0 => Ok(Gauge::Euclidean),
            Exponent::Finite(p) => Ok(Gauge::lp(*p)?),
        }
    }
}

/// Parses `1`, `2`, `3.5`, `inf`.
pub fn parse_gauge(s: &str) -> Result<Gauge> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Gauge::Infinity),
        "2" | "2.0" => Ok(Gauge::Euclidean),
        other => {
            let p: f64 = other.parse().with_context(|| format!("invalid gauge exponent {s:?}"))?;
            Ok(Gauge::lp(p)?)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub gauge: GaugeSpec,
    pub vectors: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl InstanceFile {
    pub fn from_family(family: &VectorFamily, meta: serde_json::Map<String, serde_json::Value>) -> Self {
        Self {
            dim: family.dim(),
            gauge: GaugeSpec::from_gauge(family.gauge()),
            vectors: family.vectors().iter().map(|v| v.coords().to_vec()).collect(),
            meta,
        }
    }

    pub fn to_family(&self) -> Result<VectorFamily> {
        let gauge = self.gauge.to_gauge()?;
        let vectors = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != self.dim {
                    bail!("vector {i} has {} coordinates, expected {}", row.len(), self.dim);
                }
                Vector::new(row.clone()).with_context(|| format!("vector {i}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorFamily::new(self.dim, vectors, gauge)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing instance {}", path.display()))
    }
}

pub fn read_family(path: &Path) -> Result<VectorFamily> {
    InstanceFile::read(path)?.to_family()
}
