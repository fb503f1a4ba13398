//! Run reports and output sinks.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use steinitz_core::partition::ResidualCertificate;
use steinitz_core::pipeline::CertReport;
use steinitz_core::{Ordering, PrefixReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    pub runs: Vec<RunRecord>,
    pub wall_ms: f64,
    pub passed: usize,
    pub failed: usize,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value, runs: Vec<RunRecord>, wall_ms: f64) -> Self {
        let passed = runs.iter().filter(|r| r.pass).count();
        let failed = runs.len() - passed;
        Self { command: command.into(), config, runs, wall_ms, passed, failed }
    }
}

/// One run: an ordering with its prefixes, and for reductions the certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub d: usize,
    pub n: usize,
    pub algo: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub achieved: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<f64>,
    pub ordering: Ordering,
    pub prefix: PrefixReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert: Option<CertReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_certificate: Option<ResidualCertificate>,
    pub pass: bool,
    pub ms: f64,
}

/// Fixed-column bench row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub d: usize,
    pub n: usize,
    pub eps: Option<f64>,
    pub t: Option<f64>,
    pub algo: String,
    pub achieved: f64,
    pub bound: Option<f64>,
    #[serde(rename = "C_W")]
    pub c_w: Option<f64>,
    pub inv_t: Option<f64>,
    pub inv_sigma_t: Option<f64>,
    pub pass: bool,
    pub ms: f64,
}

impl From<&RunRecord> for BenchRow {
    fn from(r: &RunRecord) -> Self {
        let cert = r.cert.as_ref();
        Self {
            d: r.d,
            n: r.n,
            eps: r.eps,
            t: r.t,
            algo: r.algo.clone(),
            achieved: r.achieved,
            bound: cert.map(|c| c.bound).or(r.guarantee),
            c_w: cert.map(|c| c.c_w),
            inv_t: cert.map(|c| c.inv_t),
            inv_sigma_t: cert.map(|c| c.inv_sigma_t),
            pass: r.pass,
            ms: r.ms,
        }
    }
}

/// Stdout, or the file at `path`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
