//! Ordering algorithms with bounded prefix sums.

mod gs;
mod kernel;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{center_family, prefix_report, Ordering, VectorFamily};

pub use gs::{gs_order, gs_order_traced, vertexify, GsStep, GsTrace, VertexOutcome, WeightState, TOLERANCE_LADDER};
pub use oracle::{brute_force_order, oracle_order, DEFAULT_ORACLE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Gs,
    Drift,
    Greedy,
    Oracle,
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Gs => "gs",
            Algo::Drift => "drift",
            Algo::Greedy => "greedy",
            Algo::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderResult {
    pub ordering: Ordering,
    /// `prefix_report(V, ordering).max_norm`.
    pub achieved: f64,
    pub algo: Algo,
    /// Proven bound for this algorithm on this instance, if any.
    pub guarantee: Option<f64>,
}

/// Ordering for drift-adjusted prefixes `Σ_{i≤k} v_i − (k/n)Σ(V)` of an arbitrary family.
///
/// Runs [`gs_order`] on the centred family. Centring keeps every vector
/// within twice the largest input norm, so the guarantee is `2d · max‖v‖`.
pub fn drift_order(family: &VectorFamily) -> Result<OrderResult> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let centered = center_family(family)?;
    let guarantee = 2.0 * family.dim() as f64 * family.max_norm();
    let perm = if centered.max_norm() == 0.0 {
        (0..family.len()).collect()
    } else {
        gs_order(&centered)?.ordering.perm
    };
    let ordering = Ordering::new(perm, true)?;
    let achieved = prefix_report(family, &ordering)?.max_norm;
    Ok(OrderResult { ordering, achieved, algo: Algo::Drift, guarantee: Some(guarantee) })
}

/// Baseline: repeatedly append the remaining vector that minimises the next
/// prefix norm, lowest index first on ties.
pub fn greedy_order(family: &VectorFamily) -> Result<OrderResult> {
    let n = family.len();
    if n == 0 {
        return Err(Error::EmptyFamily);
    }
    let gauge = family.gauge();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut current = vec![0.0; family.dim()];
    let mut trial = current.clone();
    let mut perm = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let mut best = (0, f64::INFINITY);
        for (pos, &i) in remaining.iter().enumerate() {
            for ((t, c), x) in trial.iter_mut().zip(&current).zip(family.get(i).coords()) {
                *t = c + x;
            }
            let norm = gauge.norm(&trial);
            if norm < best.1 {
                best = (pos, norm);
            }
        }
        let i = remaining.remove(best.0);
        for (c, x) in current.iter_mut().zip(family.get(i).coords()) {
            *c += x;
        }
        perm.push(i);
    }
    let ordering = Ordering::new(perm, false)?;
    let achieved = prefix_report(family, &ordering)?.max_norm;
    Ok(OrderResult { ordering, achieved, algo: Algo::Greedy, guarantee: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_near_unit, gen_random_zero_sum, Radial};
    use crate::vector::{Gauge, Vector};

    fn pair(v: &[f64]) -> VectorFamily {
        let a = Vector::new(v.to_vec()).unwrap();
        VectorFamily::new(v.len(), vec![a.clone(), a.neg()], Gauge::Euclidean).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let f = pair(&[0.6, 0.8]);
        assert_eq!(greedy_order(&f).unwrap().achieved, 1.0);

        let d = 4;
        let mut vs = Vec::new();
        for i in 0..d {
            vs.push(Vector::basis(d, i));
            vs.push(Vector::basis(d, i).neg());
        }
        let f = VectorFamily::new(d, vs, Gauge::Euclidean).unwrap();
        let r = greedy_order(&f).unwrap();
        assert!(r.achieved <= 1.0);
        assert_eq!(r.ordering.perm, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn greedy_never_beats_oracle() {
        for seed in 0..20 {
            let f = gen_random_zero_sum(2, 8, seed, Radial::Ball).unwrap();
            let g = greedy_order(&f).unwrap().achieved;
            let o = oracle_order(&f, false, 20).unwrap().achieved;
            assert!(g >= o - 1e-12);
        }
    }

    #[test]
    fn drift_matches_gs_on_exact_zero_sum() {
        let f = VectorFamily::from_rows(vec![
            vec![0.5, 0.1],
            vec![-0.5, -0.1],
            vec![0.2, -0.9],
            vec![-0.2, 0.9],
            vec![0.7, 0.7],
            vec![-0.7, -0.7],
        ])
        .unwrap();
        let gs = gs_order(&f).unwrap();
        let dr = drift_order(&f).unwrap();
        assert_eq!(gs.ordering.perm, dr.ordering.perm);
        assert!((gs.achieved - dr.achieved).abs() < 1e-12);
    }

    #[test]
    fn drift_of_identical_copies_is_zero() {
        let u = Vector::new(vec![0.0, 1.0, 0.0]).unwrap();
        let f = VectorFamily::new(3, vec![u; 7], Gauge::Euclidean).unwrap();
        assert_eq!(drift_order(&f).unwrap().achieved, 0.0);
    }

    #[test]
    fn drift_bound_on_near_unit_families() {
        for seed in 0..100 {
            let f = gen_near_unit(4, 30, 0.5, seed).unwrap();
            let r = drift_order(&f).unwrap();
            assert!(r.ordering.drift);
            assert!(r.achieved <= 8.0 + 1e-9, "seed {seed}: {}", r.achieved);
            assert!(r.achieved <= r.guarantee.unwrap() + 1e-9);
        }
    }
}
