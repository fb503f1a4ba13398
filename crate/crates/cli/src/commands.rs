use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use steinitz_core::cap::{
    auto_t, cap_measure, inequality_chain_check, lemma_c140_check, CapMethod, CapQuery, ChainReport, SmallDimCheck,
    TVariant,
};
use steinitz_core::gen::{
    gen_hadamard, gen_l1_adversarial, gen_near_unit, gen_random_zero_sum, gen_simplex, gen_two_dir, Radial,
};
use steinitz_core::order::{drift_order, greedy_order, gs_order, oracle_order, OrderResult};
use steinitz_core::partition::{ResidualCheck, WitnessSearchConfig};
use steinitz_core::pipeline::{certify, reduce_order, TChoice};
use steinitz_core::{prefix_report, Error as CoreError, Ordering, VectorFamily};

use crate::instance::{parse_gauge, read_family, InstanceFile};
use crate::report::{write_csv, write_json, BenchRow, RunRecord, RunReport};
use crate::{
    AlgoArg, BenchAlgo, BenchArgs, CapArgs, Cli, Command, Format, GenArgs, KindArg, OrderArgs, Outcome, RadialArg,
    ReduceArgs, ResidualArg, SearchArgs, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Order(a) => cmd_order(cli, a),
        Command::Reduce(a) => cmd_reduce(cli, a),
        Command::Capmeas(a) => cmd_capmeas(cli, a),
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Bench(a) => cmd_bench(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Per-prefix rows for CSV output of a single ordering.
#[derive(Serialize)]
struct PrefixRow {
    k: usize,
    index: usize,
    prefix_norm: f64,
}

fn emit_run(cli: &Cli, report: &RunReport) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, report),
        Format::Csv => {
            let rows: Vec<PrefixRow> = report
                .runs
                .iter()
                .flat_map(|r| {
                    r.ordering.perm.iter().zip(&r.prefix.per_prefix_norms).enumerate().map(|(k, (&index, &norm))| {
                        PrefixRow { k: k + 1, index, prefix_norm: norm }
                    })
                })
                .collect();
            write_csv(out, &rows)
        }
    }
}

fn record(family: &VectorFamily, algo: &str, ordering: Ordering, guarantee: Option<f64>, pass: bool, ms: f64) -> Result<RunRecord> {
    let prefix = prefix_report(family, &ordering)?;
    Ok(RunRecord {
        d: family.dim(),
        n: family.len(),
        algo: algo.into(),
        seed: None,
        eps: None,
        t: None,
        achieved: prefix.max_norm,
        guarantee,
        ordering,
        prefix,
        cert: None,
        groups: None,
        residual_certificate: None,
        pass,
        ms,
    })
}

/// Runs one ordering algorithm; `Ok(None)` means the constructive bound was broken.
fn order_with(family: &VectorFamily, algo: AlgoArg, oracle_cap: usize) -> Result<Option<OrderResult>> {
    let result = match algo {
        AlgoArg::Gs => gs_order(family),
        AlgoArg::Drift => drift_order(family),
        AlgoArg::Greedy => greedy_order(family),
        AlgoArg::Oracle => oracle_order(family, false, oracle_cap),
    };
    match result {
        Ok(r) => Ok(Some(r)),
        Err(CoreError::Postcondition(msg)) => {
            log::error!("ordering guarantee violated: {msg}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn algo_name(algo: AlgoArg) -> &'static str {
    match algo {
        AlgoArg::Gs => "gs",
        AlgoArg::Drift => "drift",
        AlgoArg::Greedy => "greedy",
        AlgoArg::Oracle => "oracle",
    }
}

fn cmd_order(cli: &Cli, args: &OrderArgs) -> Result<Outcome> {
    let mut family = read_family(&args.input)?;
    if let Some(g) = &args.gauge {
        family = family.with_gauge(parse_gauge(g)?);
    }
    let start = Instant::now();
    let Some(result) = order_with(&family, args.algo, args.oracle_cap)? else {
        return Ok(Outcome::GuaranteeViolated);
    };
    let within = result.guarantee.is_none_or(|g| result.achieved <= g + cli.tol);
    let rec = record(&family, algo_name(args.algo), result.ordering, result.guarantee, within, elapsed_ms(start))?;
    let config = json!({
        "input": args.input,
        "algo": algo_name(args.algo),
        "gauge": family.gauge().exponent().to_string(),
        "oracle_cap": args.oracle_cap,
        "tol": cli.tol,
    });
    let report = RunReport::new("order", config, vec![rec], elapsed_ms(start));
    emit_run(cli, &report)?;
    if !within {
        eprintln!("achieved {} exceeds the guarantee", report.runs[0].achieved);
        return Ok(Outcome::GuaranteeViolated);
    }
    Ok(Outcome::Success)
}

fn search_config(s: &SearchArgs, seed: u64) -> WitnessSearchConfig {
    WitnessSearchConfig {
        random_directions: s.directions,
        ascent_iterations: s.ascent,
        subset_bruteforce_cap: s.subset_cap,
        seed,
        residual_check: match s.residual {
            ResidualArg::Auto => ResidualCheck::Auto,
            ResidualArg::Exact => ResidualCheck::Exact,
            ResidualArg::Sampled => ResidualCheck::Sampled,
            ResidualArg::None => ResidualCheck::None,
        },
    }
}

/// Reduction plus certificate as a run record. `Ok(None)` when certification
/// itself reports a broken bound.
fn reduce_record(family: &VectorFamily, eps: f64, t: TChoice, cfg: &WitnessSearchConfig) -> Result<Option<RunRecord>> {
    let start = Instant::now();
    let run = reduce_order(family, eps, t, cfg)?;
    let cert = match certify(family, &run) {
        Ok(c) => c,
        Err(CoreError::Postcondition(msg)) => {
            log::error!("certificate failed: {msg}");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let mut rec = record(family, "reduce", run.ordering.clone(), None, cert.pass, 0.0)?;
    rec.eps = Some(eps);
    rec.t = Some(run.t);
    rec.groups = Some(run.partition.groups.len());
    rec.residual_certificate = Some(run.partition.residual_certificate.clone());
    rec.cert = Some(cert);
    rec.ms = elapsed_ms(start);
    Ok(Some(rec))
}

fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> Result<Outcome> {
    let family = read_family(&args.input)?;
    let cfg = search_config(&args.search, cli.seed);
    let start = Instant::now();
    let Some(rec) = reduce_record(&family, args.eps, args.t.0, &cfg)? else {
        return Ok(Outcome::CertificateFailed);
    };
    let pass = rec.pass;
    let config = json!({
        "input": args.input,
        "eps": args.eps,
        "t": args.t.0,
        "search": cfg,
    });
    let report = RunReport::new("reduce", config, vec![rec], elapsed_ms(start));
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => write_json(cli.out.as_deref(), &report)?,
        Format::Csv => write_csv(cli.out.as_deref(), &[BenchRow::from(&report.runs[0])])?,
    }
    Ok(if pass { Outcome::Success } else { Outcome::CertificateFailed })
}

/// Parses `4`, `2,3,5` or the inclusive range `2..9`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().with_context(|| format!("bad range start in {part:?}"))?;
            let b: usize = b.trim_start_matches('=').parse().with_context(|| format!("bad range end in {part:?}"))?;
            if a > b {
                bail!("empty range {part:?}");
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("not an integer: {part:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().with_context(|| format!("not a number: {p:?}")))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(out)
}

#[derive(Serialize)]
struct CapLine {
    d: usize,
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<TVariant>,
    sigma: f64,
    method: CapMethod,
    abs_error_estimate: Option<f64>,
    /// `t / 140`.
    threshold: f64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    small_d: Option<SmallDimCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<ChainReport>,
}

#[derive(Serialize)]
struct CapRow {
    d: usize,
    t: f64,
    sigma: f64,
    threshold: f64,
    holds: bool,
}

fn cap_line(d: usize, t: TChoice, checks: bool) -> Result<CapLine> {
    let mut line = match t {
        TChoice::Auto(TVariant::Standard) => {
            let c = lemma_c140_check(d)?;
            CapLine {
                d,
                t: c.t,
                variant: Some(TVariant::Standard),
                sigma: c.sigma,
                method: c.method,
                abs_error_estimate: None,
                threshold: c.threshold,
                holds: c.holds,
                small_d: c.small_d,
                chain: None,
            }
        }
        other => {
            let (t, variant) = match other {
                TChoice::Value(t) => (t, None),
                TChoice::Auto(v) => {
                    let a = auto_t(d, v)?;
                    (a.t, Some(a.variant))
                }
            };
            let cap = cap_measure(CapQuery::new(d, t)?)?;
            let threshold = t / steinitz_core::cap::LEMMA_C;
            let small_d = (d <= 9).then_some(SmallDimCheck {
                sigma_at_least_005: cap.sigma >= 0.05,
                threshold_at_most_0004: threshold <= 0.004,
            });
            CapLine {
                d,
                t,
                variant,
                sigma: cap.sigma,
                method: cap.method,
                abs_error_estimate: Some(cap.abs_error_estimate),
                threshold,
                holds: cap.sigma >= threshold,
                small_d,
                chain: None,
            }
        }
    };
    if checks && d >= 10 {
        line.chain = Some(inequality_chain_check(d as u64)?);
    }
    Ok(line)
}

fn cmd_capmeas(cli: &Cli, args: &CapArgs) -> Result<Outcome> {
    let lines = parse_usize_list(&args.d)?
        .into_iter()
        .map(|d| cap_line(d, args.t.0, args.checks))
        .collect::<Result<Vec<_>>>()?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => write_json(cli.out.as_deref(), &lines)?,
        Format::Csv => {
            let rows: Vec<CapRow> = lines
                .iter()
                .map(|l| CapRow { d: l.d, t: l.t, sigma: l.sigma, threshold: l.threshold, holds: l.holds })
                .collect();
            write_csv(cli.out.as_deref(), &rows)?
        }
    }
    Ok(Outcome::Success)
}

fn radial(r: RadialArg) -> Radial {
    match r {
        RadialArg::Sphere => Radial::Sphere,
        RadialArg::Ball => Radial::Ball,
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<Outcome> {
    if cli.format == Some(Format::Csv) {
        bail!("instances are written as JSON only");
    }
    let mut meta = serde_json::Map::new();
    let (name, family) = match args.kind {
        KindArg::Simplex => ("simplex", gen_simplex(args.d)?),
        KindArg::Random => ("random_zero_sum", gen_random_zero_sum(args.d, args.n, cli.seed, radial(args.radial))?),
        KindArg::NearUnit => ("near_unit", gen_near_unit(args.d, args.n, args.eps, cli.seed)?),
        KindArg::TwoDir => ("two_dir", gen_two_dir(args.d, args.n)?),
        KindArg::L1 | KindArg::Hadamard => {
            let (name, m) = if args.kind == KindArg::L1 {
                ("l1_adversarial", gen_l1_adversarial(args.d)?)
            } else {
                ("hadamard", gen_hadamard(args.d)?)
            };
            meta.insert("optimum".into(), json!(m.oracle));
            meta.insert("target".into(), json!(m.target));
            (name, m.family)
        }
    };
    meta.insert("generator".into(), json!(name));
    meta.insert("d".into(), json!(args.d));
    meta.insert("n".into(), json!(args.n));
    meta.insert("eps".into(), json!(args.eps));
    meta.insert("radial".into(), json!(radial(args.radial)));
    meta.insert("seed".into(), json!(cli.seed));
    meta.insert("prng".into(), json!("ChaCha8Rng::seed_from_u64"));
    write_json(cli.out.as_deref(), &InstanceFile::from_family(&family, meta))?;
    Ok(Outcome::Success)
}

/// Grid cell key: positions in the d, n, ε lists, the seed, and the algorithm.
type CellKey = (usize, usize, usize, u64, BenchAlgo);

fn bench_cell(
    key: CellKey,
    d: usize,
    n: usize,
    eps: f64,
    args: &BenchArgs,
    cfg: &WitnessSearchConfig,
) -> Result<(RunRecord, Outcome)> {
    let (_, _, _, seed, algo) = key;
    let family = gen_random_zero_sum(d, n, seed, radial(args.radial))?;
    let start = Instant::now();
    let (mut rec, outcome) = match algo {
        BenchAlgo::Reduce => {
            let cell_cfg = WitnessSearchConfig { seed, ..*cfg };
            match reduce_record(&family, eps, args.t.0, &cell_cfg)? {
                Some(r) => {
                    let o = if r.pass { Outcome::Success } else { Outcome::CertificateFailed };
                    (r, o)
                }
                None => bail!("certificate postcondition failed at d={d}, n={n}, eps={eps}, seed={seed}"),
            }
        }
        other => {
            let algo = match other {
                BenchAlgo::Gs => AlgoArg::Gs,
                BenchAlgo::Drift => AlgoArg::Drift,
                BenchAlgo::Greedy => AlgoArg::Greedy,
                _ => AlgoArg::Oracle,
            };
            let Some(r) = order_with(&family, algo, steinitz_core::order::DEFAULT_ORACLE_CAP)? else {
                bail!("ordering guarantee broken at d={d}, n={n}, seed={seed}");
            };
            let within = r.guarantee.is_none_or(|g| r.achieved <= g + 1e-9);
            let rec = record(&family, algo_name(algo), r.ordering, r.guarantee, within, 0.0)?;
            (rec, if within { Outcome::Success } else { Outcome::GuaranteeViolated })
        }
    };
    rec.seed = Some(seed);
    rec.ms = elapsed_ms(start);
    Ok((rec, outcome))
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<Outcome> {
    let ds = parse_usize_list(&args.d)?;
    let ns = parse_usize_list(&args.n)?;
    let epss = parse_f64_list(&args.eps)?;
    let cfg = search_config(&args.search, cli.seed);
    let mut algos = args.algo.clone();
    algos.sort();
    algos.dedup();

    let mut cells: Vec<CellKey> = Vec::new();
    for di in 0..ds.len() {
        for ni in 0..ns.len() {
            for seed in cli.seed..cli.seed + args.seeds {
                for &algo in &algos {
                    // Only the reduction depends on ε.
                    let eps_slots = if algo == BenchAlgo::Reduce { epss.len() } else { 1 };
                    for ei in 0..eps_slots {
                        cells.push((di, ni, ei, seed, algo));
                    }
                }
            }
        }
    }
    cells.sort();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("building the worker pool")?;
    let start = Instant::now();
    let results: Vec<(RunRecord, Outcome)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&key| {
                let (di, ni, ei, _, algo) = key;
                let eps = (algo == BenchAlgo::Reduce).then(|| epss[ei]);
                let (mut rec, o) = bench_cell(key, ds[di], ns[ni], eps.unwrap_or(epss[0]), args, &cfg)?;
                rec.eps = eps;
                Ok((rec, o))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let outcome = if results.iter().any(|(_, o)| *o == Outcome::GuaranteeViolated) {
        Outcome::GuaranteeViolated
    } else if results.iter().any(|(_, o)| *o == Outcome::CertificateFailed) {
        Outcome::CertificateFailed
    } else {
        Outcome::Success
    };
    let runs: Vec<RunRecord> = results.into_iter().map(|(r, _)| r).collect();
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<BenchRow> = runs.iter().map(BenchRow::from).collect();
            write_csv(cli.out.as_deref(), &rows)?;
        }
        Format::Json => {
            let config = json!({
                "d": ds, "n": ns, "eps": epss, "seeds": args.seeds, "seed": cli.seed,
                "algo": algos.iter().map(|a| format!("{a:?}").to_lowercase()).collect::<Vec<_>>(),
                "t": args.t.0, "search": cfg,
            });
            write_json(cli.out.as_deref(), &RunReport::new("bench", config, runs, elapsed_ms(start)))?;
        }
    }
    Ok(outcome)
}

fn read_ordering(path: &Path) -> Result<Ordering> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing ordering {}", path.display()))?;
    let node = if doc.get("perm").is_some() {
        doc
    } else if let Some(o) = doc.pointer("/runs/0/ordering") {
        o.clone()
    } else {
        bail!("{} holds neither an ordering nor an order report", path.display());
    };
    Ok(serde_json::from_value(node)?)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<Outcome> {
    let family = read_family(&args.input)?;
    let mut ordering = read_ordering(&args.ordering)?;
    if args.drift {
        ordering.drift = true;
    }
    let start = Instant::now();
    let rec = record(&family, "verify", ordering, None, true, 0.0)?;
    let config = json!({ "input": args.input, "ordering": args.ordering, "drift": rec.ordering.drift });
    emit_run(cli, &RunReport::new("verify", config, vec![rec], elapsed_ms(start)))?;
    Ok(Outcome::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_usize_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_usize_list("2..=3,7").unwrap(), vec![2, 3, 7]);
        assert!(parse_usize_list("5..2").is_err());
        assert!(parse_usize_list("x").is_err());
        assert_eq!(parse_f64_list("0.25, 0.5").unwrap(), vec![0.25, 0.5]);
        assert!(parse_f64_list("").is_err());
    }

    #[test]
    fn run_report_round_trips() {
        let family = gen_random_zero_sum(3, 25, 4, Radial::Ball).unwrap();
        let rec = reduce_record(&family, 0.5, TChoice::default(), &WitnessSearchConfig::default()).unwrap().unwrap();
        let gs = gs_order(&family).unwrap();
        let rec2 = record(&family, "gs", gs.ordering, gs.guarantee, true, 1.25).unwrap();
        let report = RunReport::new("reduce", json!({"eps": 0.5}), vec![rec, rec2], 3.5);
        let text = serde_json::to_string(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
