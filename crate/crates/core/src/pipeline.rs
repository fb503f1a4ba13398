//! Reduction of a zero-sum Euclidean family to an ordering with certified prefixes.
//!
//! The family is partitioned into cone-aligned groups plus a residual, each
//! group `V_α` is compressed to `w_α = ε Σ(V_α)`, the `w`'s are ordered with
//! drift-adjusted prefixes, and the groups are laid out in that order with the
//! residual at the end. Every prefix of the result is then bounded by
//! `(1/ε)(C_W + 1/t + 1/σ_t)`, where `C_W` is the measured drift constant of
//! the `w` ordering.

use serde::{Deserialize, Serialize};

use crate::cap::{auto_t, cap_measure, CapQuery, TVariant};
use crate::error::{Error, Result};
use crate::order::{drift_order, OrderResult};
use crate::partition::{partition, PartitionResult, WitnessSearchConfig};
use crate::vector::{prefix_report, prefix_vectors, Ordering, VectorFamily, DEFAULT_TOL};

/// Slack on the final `prefix_max ≤ bound` comparison.
pub const CERT_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TChoice {
    Value(f64),
    Auto(TVariant),
}

impl Default for TChoice {
    fn default() -> Self {
        TChoice::Auto(TVariant::Standard)
    }
}

impl TChoice {
    pub fn resolve(self, d: usize) -> Result<f64> {
        match self {
            TChoice::Value(t) => Ok(t),
            TChoice::Auto(variant) => Ok(auto_t(d, variant)?.t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WFamily {
    /// `w_j = ε Σ(V_j)` for group `j` of the partition.
    pub w_vectors: VectorFamily,
    pub eps: f64,
    /// `group_map[j]` is the partition group behind `w_j`.
    pub group_map: Vec<usize>,
}

/// Compresses each group to `ε Σ(V_α)` and checks the norm window and `Σ(W) = −ε Σ(R)`.
pub fn build_w(part: &PartitionResult, family: &VectorFamily) -> Result<WFamily> {
    let eps = part.eps;
    let mut w = Vec::with_capacity(part.groups.len());
    for (j, g) in part.groups.iter().enumerate() {
        let wj = family.sum_of(&g.indices).scaled(eps);
        let norm = wj.euclidean();
        if norm < 1.0 - eps - 1e-9 || norm > 1.0 + 1e-9 {
            return Err(Error::Postcondition(format!(
                "w_{j} has norm {norm} outside [{}, 1]",
                1.0 - eps
            )));
        }
        w.push(wj);
    }
    let w_vectors = VectorFamily::new(family.dim(), w, family.gauge())?;
    if family.check_zero_sum(DEFAULT_TOL).is_ok() && !w_vectors.is_empty() {
        let gap = w_vectors.sum()?.add(&family.sum_of(&part.residual).scaled(eps)).euclidean();
        if gap > 1e-9 {
            return Err(Error::Postcondition(format!("Σ(W) + εΣ(R) has norm {gap}")));
        }
    }
    let group_map = (0..part.groups.len()).collect();
    Ok(WFamily { w_vectors, eps, group_map })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    /// Plain (not drift-adjusted) ordering of the input family.
    pub ordering: Ordering,
    pub partition: PartitionResult,
    pub w: WFamily,
    /// Drift ordering of `W`; absent when there are no groups.
    pub w_order: Option<OrderResult>,
    pub eps: f64,
    pub t: f64,
    /// Measured drift constant of the `W` ordering, `0` without groups.
    pub c_w: f64,
}

impl Reduction {
    /// Number of leading positions occupied by groups.
    pub fn grouped_len(&self) -> usize {
        self.partition.groups.iter().map(|g| g.indices.len()).sum()
    }

    /// Groups in layout order.
    pub fn layout(&self) -> Vec<usize> {
        match &self.w_order {
            Some(o) => o.ordering.perm.iter().map(|&j| self.w.group_map[j]).collect(),
            None => Vec::new(),
        }
    }
}

pub fn reduce_order(family: &VectorFamily, eps: f64, t: TChoice, cfg: &WitnessSearchConfig) -> Result<Reduction> {
    if !family.gauge().is_euclidean() {
        return Err(Error::InvalidParameter("the reduction needs the Euclidean gauge".into()));
    }
    let t = t.resolve(family.dim())?;
    let part = partition(family, eps, t, cfg)?;
    let w = build_w(&part, family)?;
    let w_order = if w.w_vectors.is_empty() { None } else { Some(drift_order(&w.w_vectors)?) };
    let c_w = w_order.as_ref().map_or(0.0, |o| o.achieved);

    let mut perm = Vec::with_capacity(family.len());
    if let Some(o) = &w_order {
        for &j in &o.ordering.perm {
            perm.extend_from_slice(&part.groups[w.group_map[j]].indices);
        }
    }
    perm.extend_from_slice(&part.residual);
    let ordering = Ordering::new(perm, false)?;
    log::debug!(
        "reduction: {} groups, residual {}, C_W = {c_w:.6}",
        part.groups.len(),
        part.residual.len()
    );
    Ok(Reduction { ordering, partition: part, w, w_order, eps, t, c_w })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerTypeMax {
    /// Largest prefix inside or at the end of a group; `None` without groups.
    pub type_a: Option<f64>,
    /// Largest prefix inside the residual tail; `None` with an empty residual.
    pub type_b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub prefix_max: f64,
    #[serde(rename = "C_W")]
    pub c_w: f64,
    pub sigma_t: f64,
    pub inv_t: f64,
    pub inv_sigma_t: f64,
    /// `(1/ε)(C_W + 1/t + 1/σ_t)`.
    pub bound: f64,
    pub per_type_max: PerTypeMax,
    /// `C_W/ε + |Σ(R)| + max group partial`; holds by the triangle inequality alone.
    pub type_a_measured_bound: f64,
    /// `C_W/ε + 1/(εσ_t) + max group partial`; needs the residual property.
    pub type_a_bound: f64,
    /// `1/(εσ_t)`; needs the residual property.
    pub type_b_bound: f64,
    pub type_a_within: bool,
    pub type_b_within: bool,
    /// Set when the residual was certified exactly, so the per-type bounds are enforced.
    pub per_type_enforced: bool,
    pub max_group_partial: f64,
    pub pass: bool,
}

/// Certifies every prefix of a reduction's ordering.
///
/// Fails with [`Error::Postcondition`] if an unconditional bound is broken, or
/// if a per-type bound is broken although the residual was certified exactly.
pub fn certify(family: &VectorFamily, run: &Reduction) -> Result<CertReport> {
    let (eps, t) = (run.eps, run.t);
    if run.partition.eps != eps || run.partition.t != t || run.w.group_map.len() != run.partition.groups.len() {
        return Err(Error::InvalidParameter("reduction parts come from different runs".into()));
    }
    run.ordering.validate(family.len())?;
    if run.ordering.drift {
        return Err(Error::InvalidParameter("certification applies to plain prefixes".into()));
    }

    let sigma_t = cap_measure(CapQuery::new(family.dim(), t)?)?.sigma;
    let inv_t = 1.0 / t;
    let inv_sigma_t = 1.0 / sigma_t;
    let bound = (run.c_w + inv_t + inv_sigma_t) / eps;

    let prefixes = prefix_report(family, &run.ordering)?.per_prefix_norms;
    let prefix_max = prefixes.iter().copied().fold(0.0, f64::max);
    let split = run.grouped_len();
    let fold_max = |s: &[f64]| (!s.is_empty()).then(|| s.iter().copied().fold(0.0, f64::max));
    let per_type_max = PerTypeMax { type_a: fold_max(&prefixes[..split]), type_b: fold_max(&prefixes[split..]) };

    let partials = group_partial_check(&run.partition, family)?;
    let residual_norm = family.sum_of(&run.partition.residual).euclidean();
    let type_a_measured_bound = run.c_w / eps + residual_norm + partials.max_partial;
    let type_a_bound = run.c_w / eps + inv_sigma_t / eps + partials.max_partial;
    let type_b_bound = inv_sigma_t / eps;
    let type_a_within = per_type_max.type_a.is_none_or(|m| m <= type_a_bound + CERT_SLACK);
    let type_b_within = per_type_max.type_b.is_none_or(|m| m <= type_b_bound + CERT_SLACK);
    let per_type_enforced = run.partition.residual_certificate.is_exact_and_holds();

    if let Some(a) = per_type_max.type_a {
        if a > type_a_measured_bound + CERT_SLACK {
            return Err(Error::Postcondition(format!(
                "type (a) prefix {a} exceeds the measured bound {type_a_measured_bound}"
            )));
        }
    }
    if per_type_enforced && !(type_a_within && type_b_within) {
        return Err(Error::Postcondition(
            "per-type prefix bound violated although the residual was certified".into(),
        ));
    }
    if !type_b_within {
        log::warn!("type (b) prefixes exceed 1/(εσ_t); the residual was not certified exactly");
    }

    Ok(CertReport {
        prefix_max,
        c_w: run.c_w,
        sigma_t,
        inv_t,
        inv_sigma_t,
        bound,
        per_type_max,
        type_a_measured_bound,
        type_a_bound,
        type_b_bound,
        type_a_within,
        type_b_within,
        per_type_enforced,
        max_group_partial: partials.max_partial,
        pass: prefix_max <= bound + CERT_SLACK,
    })
}

/// `(1/ε)(S_ε + 200 √(d / ln d))`.
pub fn bound_value(d: usize, eps: f64, s_eps: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("the bound is stated for d ≥ 2, got {d}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1], got {eps}")));
    }
    let d = d as f64;
    Ok((s_eps + 200.0 * (d / d.ln()).sqrt()) / eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPartialReport {
    /// Largest `|Σ(T)|` over prefixes `T` of the groups' internal order.
    pub max_partial: f64,
    /// `1/(εt)`.
    pub limit: f64,
    pub holds: bool,
}

/// Checks `|Σ(T)| ≤ 1/(εt)` for every prefix `T` of every group, in the
/// ascending order used for layout.
pub fn group_partial_check(part: &PartitionResult, family: &VectorFamily) -> Result<GroupPartialReport> {
    let limit = 1.0 / (part.eps * part.t);
    let mut max_partial = 0.0f64;
    for g in &part.groups {
        let sub = family.subfamily(&g.indices).with_gauge(crate::vector::Gauge::Euclidean);
        for p in prefix_vectors(&sub, &Ordering::identity(g.indices.len(), false))? {
            max_partial = max_partial.max(p.euclidean());
        }
    }
    let holds = max_partial <= limit + 1e-9;
    if !holds {
        return Err(Error::Postcondition(format!("group partial {max_partial} exceeds 1/(εt) = {limit}")));
    }
    Ok(GroupPartialReport { max_partial, limit, holds })
}

/// Convenience: reduce, then certify.
pub fn reduce_and_certify(
    family: &VectorFamily,
    eps: f64,
    t: TChoice,
    cfg: &WitnessSearchConfig,
) -> Result<(Reduction, CertReport)> {
    let run = reduce_order(family, eps, t, cfg)?;
    let cert = certify(family, &run)?;
    Ok((run, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_random_zero_sum, gen_two_dir, Radial};
    use crate::partition::{Group, ResidualCertificate};
    use crate::vector::{Gauge, Vector};

    fn cfg() -> WitnessSearchConfig {
        WitnessSearchConfig::default()
    }

    #[test]
    fn bound_value_examples() {
        assert!((bound_value(8, 1.0, 0.0).unwrap() - 392.3).abs() < 0.05);
        assert!((bound_value(4, 1.0, 0.0).unwrap() - 339.7).abs() < 0.05);
        let a = bound_value(10, 0.5, 3.0).unwrap();
        let b = bound_value(10, 0.25, 3.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(bound_value(1, 0.5, 0.0).is_err());
        assert!(bound_value(5, 0.0, 0.0).is_err());
    }

    fn single_group_partition(family: &VectorFamily, eps: f64, indices: Vec<usize>, residual: Vec<usize>) -> PartitionResult {
        let u = family.sum_of(&indices);
        PartitionResult {
            groups: vec![Group { indices, witness: crate::partition::BallCone::new(&u, 0.5).unwrap() }],
            residual,
            eps,
            t: 0.5,
            residual_certificate: ResidualCertificate::None,
        }
    }

    #[test]
    fn w_window_endpoints() {
        let u = Vector::basis(2, 0);
        // Σ(V_α) = 2u = (1/ε)u at ε = 1/2.
        let f = VectorFamily::new(2, vec![u.clone(), u.clone(), u.neg(), u.neg()], Gauge::Euclidean).unwrap();
        let w = build_w(&single_group_partition(&f, 0.5, vec![0, 1], vec![2, 3]), &f).unwrap();
        assert_eq!(w.w_vectors.get(0).euclidean(), 1.0);
        // Σ(V_α) = 3u = (1/ε − 1)u at ε = 1/4.
        let f = VectorFamily::new(2, [vec![u.clone(); 3], vec![u.neg(); 3]].concat(), Gauge::Euclidean).unwrap();
        let w = build_w(&single_group_partition(&f, 0.25, vec![0, 1, 2], vec![3, 4, 5]), &f).unwrap();
        assert!((w.w_vectors.get(0).euclidean() - 0.75).abs() < 1e-15);
        // A single unit vector is too short for ε = 1/4.
        assert!(build_w(&single_group_partition(&f, 0.25, vec![0], vec![1, 2, 3, 4, 5]), &f).is_err());
    }

    #[test]
    fn antipodal_pair_is_residual_only() {
        let f = VectorFamily::from_rows(vec![vec![0.6, 0.8], vec![-0.6, -0.8]]).unwrap();
        let (run, cert) = reduce_and_certify(&f, 0.25, TChoice::default(), &cfg()).unwrap();
        assert_eq!(run.ordering.perm, vec![0, 1]);
        assert!(run.w_order.is_none());
        assert_eq!(cert.c_w, 0.0);
        assert!(cert.per_type_max.type_a.is_none());
        assert!(cert.per_type_enforced && cert.type_b_within && cert.pass);
    }

    #[test]
    fn two_directions_follow_w_order() {
        let f = gen_two_dir(2, 8).unwrap();
        let (run, cert) = reduce_and_certify(&f, 0.5, TChoice::default(), &cfg()).unwrap();
        assert!(cert.pass);
        // Singleton groups and an empty residual: V's prefixes are W's scaled by 1/ε.
        assert_eq!(run.partition.groups.len(), 16);
        assert!(run.partition.residual.is_empty());
        assert!(cert.prefix_max <= run.c_w / 0.5 + 1e-12);
        assert!(run.c_w <= run.w_order.as_ref().unwrap().guarantee.unwrap() + 1e-12);
    }

    #[test]
    fn certificate_invariants_on_random_runs() {
        for seed in 0..12u64 {
            let d = 3 + seed as usize % 4;
            let eps = [0.25, 0.5, 0.9][seed as usize % 3];
            let f = gen_random_zero_sum(d, 80, seed, Radial::Ball).unwrap();
            let (run, cert) = reduce_and_certify(&f, eps, TChoice::default(), &cfg()).unwrap();
            assert!(cert.pass, "seed {seed}");
            let prefixes = prefix_vectors(&f, &run.ordering).unwrap();
            assert!(prefixes.last().unwrap().euclidean() < 1e-9);

            // w prefixes against C_W with Σ(W) = −εΣ(R).
            let sr = f.sum_of(&run.partition.residual);
            if let Some(o) = &run.w_order {
                let m = o.ordering.len();
                let mut acc = Vector::zeros(d);
                for (j, &k) in o.ordering.perm.iter().enumerate() {
                    acc = acc.add(run.w.w_vectors.get(k));
                    let adj = acc.add(&sr.scaled(eps * (j + 1) as f64 / m as f64));
                    assert!(adj.euclidean() <= run.c_w + 1e-9);
                }
            }

            // Type (a): group boundary sums plus an internal prefix.
            let mut pos = 0;
            let mut boundary = Vector::zeros(d);
            for g in run.layout() {
                let idx = &run.partition.groups[g].indices;
                let mut inner = Vector::zeros(d);
                for &i in idx {
                    inner = inner.add(f.get(i));
                    let expect = boundary.add(&inner);
                    assert!(expect.sub(&prefixes[pos]).euclidean() < 1e-12);
                    pos += 1;
                }
                boundary = boundary.add(&f.sum_of(idx));
            }
            // Type (b): tail prefixes equal −Σ(R∖S).
            for (s, &i) in run.partition.residual.iter().enumerate() {
                let rest = f.sum_of(&run.partition.residual[s + 1..]);
                assert!(prefixes[pos].add(&rest).euclidean() < 1e-9, "residual index {i}");
                pos += 1;
            }
            assert_eq!(pos, f.len());
        }
    }

    #[test]
    fn certificate_below_closed_bound() {
        let eps = 0.5;
        for seed in 0..5 {
            let f = gen_random_zero_sum(4, 60, seed, Radial::Sphere).unwrap();
            let (_, cert) = reduce_and_certify(&f, eps, TChoice::default(), &cfg()).unwrap();
            assert!(cert.c_w <= 8.0);
            assert!(cert.bound <= bound_value(4, eps, cert.c_w).unwrap());
        }
    }

    #[test]
    fn group_partials_within_limit() {
        for seed in 0..10 {
            let f = gen_random_zero_sum(3, 50, seed, Radial::Ball).unwrap();
            let run = reduce_order(&f, 0.25, TChoice::Value(0.4), &cfg()).unwrap();
            let r = group_partial_check(&run.partition, &f).unwrap();
            assert!(r.holds && r.max_partial <= 4.0 + 1e-9);
            assert_eq!(r.limit, 1.0 / (0.25 * 0.4));
        }
    }

    #[test]
    fn refined_t_runs() {
        let f = gen_random_zero_sum(6, 50, 1, Radial::Ball).unwrap();
        let run = reduce_order(&f, 0.5, TChoice::Auto(TVariant::Refined), &cfg()).unwrap();
        assert_eq!(run.t, auto_t(6, TVariant::Refined).unwrap().t);
        assert!(certify(&f, &run).unwrap().pass);
    }

    #[test]
    fn rejects_other_gauges() {
        let f = gen_two_dir(2, 2).unwrap().with_gauge(Gauge::Lp(1.0));
        assert!(reduce_order(&f, 0.5, TChoice::default(), &cfg()).is_err());
    }
}
