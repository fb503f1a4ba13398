//! `steinitz`: order vector families, run the cone reduction, measure caps.
//!
//! Exit codes: 0 success, 1 usage/IO/domain error, 2 ordering guarantee
//! violated, 3 certificate failure.

mod commands;
mod instance;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use steinitz_core::cap::TVariant;
use steinitz_core::pipeline::TChoice;

#[derive(Parser, Debug)]
#[command(name = "steinitz", version, about = "Bounded prefix-sum orderings and their certificates")]
pub struct Cli {
    /// Base seed for generators and direction sets.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance for guarantee checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads for `bench` (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Order an instance and report its prefix norms.
    Order(OrderArgs),
    /// Partition, compress and order a zero-sum Euclidean instance, then certify it.
    Reduce(ReduceArgs),
    /// Spherical-cap measure and the c = 140 check.
    Capmeas(CapArgs),
    /// Write a generated instance.
    Gen(GenArgs),
    /// Sweep seeds × ε × d × n and emit one row per run.
    Bench(BenchArgs),
    /// Recompute prefix norms for a given ordering.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Gs,
    Greedy,
    Oracle,
    Drift,
}

#[derive(Args, Debug)]
pub struct OrderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "gs")]
    pub algo: AlgoArg,
    /// Replace the instance's gauge: 1, 2, any p ≥ 1, or inf.
    #[arg(long)]
    pub gauge: Option<String>,
    /// Largest family the subset oracle accepts.
    #[arg(long, default_value_t = steinitz_core::order::DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
}

/// `auto`, `refined`, or a number in (0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TArg(pub TChoice);

impl FromStr for TArg {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(TArg(match s {
            "auto" => TChoice::Auto(TVariant::Standard),
            "refined" => TChoice::Auto(TVariant::Refined),
            v => TChoice::Value(v.parse().map_err(|_| anyhow!("expected auto, refined or a number, got {v:?}"))?),
        }))
    }
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Quasi-uniform directions tried by the cone search (antipodes added).
    #[arg(long, default_value_t = 256)]
    pub directions: usize,
    #[arg(long, default_value_t = 8)]
    pub ascent: usize,
    /// Cone slices up to this size are searched for their best subset.
    #[arg(long, default_value_t = 12)]
    pub subset_cap: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub residual: ResidualArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ResidualArg {
    Auto,
    Exact,
    Sampled,
    None,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value = "auto")]
    pub t: TArg,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct CapArgs {
    /// Dimension, list (`2,3,5`) or inclusive range (`2..9`).
    #[arg(long)]
    pub d: String,
    #[arg(long, default_value = "auto")]
    pub t: TArg,
    /// Also evaluate the inequality chain (d ≥ 10).
    #[arg(long)]
    pub checks: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Simplex,
    Random,
    L1,
    Hadamard,
    NearUnit,
    TwoDir,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RadialArg {
    Sphere,
    Ball,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub d: usize,
    /// Family size (random, near-unit) or copies per direction (two-dir).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Radius window for near-unit families.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "ball")]
    pub radial: RadialArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum BenchAlgo {
    Reduce,
    Gs,
    Drift,
    Greedy,
    Oracle,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Dimensions: list or inclusive range.
    #[arg(long, default_value = "3")]
    pub d: String,
    /// Family sizes: list or inclusive range.
    #[arg(long, default_value = "50")]
    pub n: String,
    /// Comma-separated ε values.
    #[arg(long, default_value = "0.5")]
    pub eps: String,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "reduce")]
    pub algo: Vec<BenchAlgo>,
    #[arg(long, default_value = "auto")]
    pub t: TArg,
    #[arg(long, value_enum, default_value = "ball")]
    pub radial: RadialArg,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// An `order` report or a bare `{"perm": [...], "drift": bool}` document.
    #[arg(long)]
    pub ordering: PathBuf,
    /// Evaluate drift-adjusted prefixes regardless of the file.
    #[arg(long)]
    pub drift: bool,
}

/// How a command finished when it did not fail outright.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    GuaranteeViolated,
    CertificateFailed,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(match o {
            Outcome::Success => 0,
            Outcome::GuaranteeViolated => 2,
            Outcome::CertificateFailed => 3,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => outcome.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
