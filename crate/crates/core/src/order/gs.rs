//! Constructive `S(B) ≤ d` ordering via linear dependencies.
//!
//! Positions are filled from the back. With `A_k` the set of vectors still
//! unplaced, we keep weights `λ ∈ [0,1]^{A_k}` with `Σ λ_i v_i = 0` and
//! `Σ λ_i = k − d`. Shrinking the weight sum to `k − 1 − d` and moving to a
//! vertex of the resulting polytope forces some weight to zero; that vector
//! takes position `k`. Since `Σ_{A_k} v_i = Σ (1 − λ_i) v_i` and
//! `Σ (1 − λ_i) = d`, every prefix has norm at most `d · max‖v‖`.

use serde::{Deserialize, Serialize};

use super::kernel::kernel_vector;
use super::{Algo, OrderResult};
use crate::error::{Error, Result};
use crate::vector::{prefix_report, Ordering, VectorFamily, DEFAULT_TOL};

/// Feasibility tolerances tried in turn before a state is declared infeasible.
pub const TOLERANCE_LADDER: [f64; 3] = [1e-9, 1e-7, 1e-5];

/// Weights within this distance of 0 or 1 after a walk are snapped onto the bound.
const SNAP: f64 = 1e-14;

/// Largest weight accepted as "zero" when no weight is exactly zero at a vertex.
const ZERO_WEIGHT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    /// Family indices of the current set, ascending.
    pub support: Vec<usize>,
    /// `weights[j]` belongs to `support[j]`.
    pub weights: Vec<f64>,
}

impl WeightState {
    pub fn uniform(support: Vec<usize>, value: f64) -> Self {
        let weights = vec![value; support.len()];
        Self { support, weights }
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weighted_sum(&self, family: &VectorFamily) -> Vec<f64> {
        let mut acc = vec![0.0; family.dim()];
        for (&i, &w) in self.support.iter().zip(&self.weights) {
            for (a, x) in acc.iter_mut().zip(family.get(i).coords()) {
                *a += w * x;
            }
        }
        acc
    }

    pub fn fractional_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0 && w < 1.0).count()
    }

    /// Smallest ladder tolerance at which the state satisfies all constraints.
    pub fn feasibility_level(&self, family: &VectorFamily, target_sum: f64) -> Option<f64> {
        let scale = family.max_norm().max(1.0);
        let bound_gap = self
            .weights
            .iter()
            .map(|&w| (-w).max(w - 1.0))
            .fold(0.0, f64::max);
        let sum_gap = (self.weight_sum() - target_sum).abs();
        let vec_gap = crate::vector::euclidean(&self.weighted_sum(family)) / scale;
        let worst = bound_gap.max(sum_gap).max(vec_gap);
        TOLERANCE_LADDER.into_iter().find(|&tol| worst <= tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexOutcome {
    pub state: WeightState,
    /// Number of null-space walks performed.
    pub walks: usize,
    /// Ladder tolerance at which the output state was accepted.
    pub tolerance: f64,
}

/// Moves a feasible weight state to a vertex: at most `d + 1` weights remain
/// strictly inside `(0, 1)`, with the weight sum and the weighted vector sum
/// unchanged.
///
/// Each walk takes the first `d + 2` fractional coordinates (ascending
/// position), finds a kernel vector of their `(d + 1) × (d + 2)` constraint
/// matrix, and moves along it until one coordinate reaches 0 or 1.
pub fn vertexify(state: WeightState, family: &VectorFamily, target_sum: f64) -> Result<VertexOutcome> {
    if state.support.len() != state.weights.len() {
        return Err(Error::InvalidParameter("support and weights differ in length".into()));
    }
    if state.feasibility_level(family, target_sum).is_none() {
        return Err(Error::InvalidParameter("input weight state is infeasible".into()));
    }
    let d = family.dim();
    let mut state = state;
    let mut walks = 0;
    loop {
        let frac: Vec<usize> = (0..state.weights.len())
            .filter(|&j| state.weights[j] > 0.0 && state.weights[j] < 1.0)
            .collect();
        if frac.len() <= d + 1 {
            break;
        }
        if walks > state.weights.len() {
            return Err(Error::Numerical("vertex walk did not terminate".into()));
        }
        let chosen = &frac[..d + 2];
        let cols: Vec<Vec<f64>> = chosen
            .iter()
            .map(|&j| {
                let mut c = family.get(state.support[j]).coords().to_vec();
                c.push(1.0);
                c
            })
            .collect();
        let z = kernel_vector(&cols, 1e-12)
            .ok_or_else(|| Error::Numerical("no kernel vector among d + 2 columns".into()))?;

        let mut step = f64::INFINITY;
        let mut hit = (usize::MAX, 0.0);
        for (&j, &zj) in chosen.iter().zip(&z) {
            let w = state.weights[j];
            let (room, bound) = if zj > 0.0 {
                ((1.0 - w) / zj, 1.0)
            } else if zj < 0.0 {
                (w / -zj, 0.0)
            } else {
                continue;
            };
            if room < step {
                step = room;
                hit = (j, bound);
            }
        }
        for (&j, &zj) in chosen.iter().zip(&z) {
            let w = &mut state.weights[j];
            *w += step * zj;
            if *w < SNAP {
                *w = 0.0;
            } else if *w > 1.0 - SNAP {
                *w = 1.0;
            }
        }
        state.weights[hit.0] = hit.1;
        walks += 1;
    }
    let tolerance = state
        .feasibility_level(family, target_sum)
        .ok_or_else(|| Error::Numerical("weight state drifted beyond the tolerance ladder".into()))?;
    if tolerance > TOLERANCE_LADDER[0] {
        log::warn!("vertex walk accepted at escalated tolerance {tolerance:e}");
    }
    Ok(VertexOutcome { state, walks, tolerance })
}

/// One step of the backward recursion, recorded for `A_k` before position `k` is assigned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GsStep {
    pub k: usize,
    /// `‖Σ(A_k)‖` in the family's gauge, original units.
    pub set_sum_norm: f64,
    /// `Σ (1 − λ_i)` over `A_k`; equals `d` while weights are maintained.
    pub complement_weight: Option<f64>,
    pub walks: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GsTrace {
    pub steps: Vec<GsStep>,
}

impl GsTrace {
    pub fn max_set_sum_norm(&self) -> f64 {
        self.steps.iter().map(|s| s.set_sum_norm).fold(0.0, f64::max)
    }
}

pub fn gs_order(family: &VectorFamily) -> Result<OrderResult> {
    gs_order_traced(family).map(|(r, _)| r)
}

/// [`gs_order`] plus the per-step record of the recursion.
///
/// The family must sum to zero (relative tolerance [`DEFAULT_TOL`]); the
/// guarantee is `d · max(1, max‖v‖)`.
pub fn gs_order_traced(family: &VectorFamily) -> Result<(OrderResult, GsTrace)> {
    let n = family.len();
    if n == 0 {
        return Err(Error::EmptyFamily);
    }
    family.check_zero_sum(DEFAULT_TOL)?;
    let d = family.dim();
    let r = family.max_norm();
    let guarantee = d as f64 * r.max(1.0);
    let mut trace = GsTrace::default();

    let mut perm = vec![usize::MAX; n];
    let mut support: Vec<usize> = (0..n).collect();
    if n > d && r > 0.0 {
        let work = family.scaled(1.0 / r);
        let mut state = WeightState::uniform(support.clone(), (n - d) as f64 / n as f64);
        for k in (d + 1..=n).rev() {
            let set_sum_norm = family.gauge().norm(family.sum_of(&state.support).coords());
            let complement: f64 = state.weights.iter().map(|w| 1.0 - w).sum();
            if set_sum_norm > guarantee + 1e-6 {
                return Err(Error::Postcondition(format!(
                    "|Σ(A_{k})| = {set_sum_norm} exceeds {guarantee}"
                )));
            }
            let target = (k - 1 - d) as f64;
            let shrink = target / (k - d) as f64;
            state.weights.iter_mut().for_each(|w| *w *= shrink);
            let out = vertexify(state, &work, target)?;
            trace.steps.push(GsStep {
                k,
                set_sum_norm,
                complement_weight: Some(complement),
                walks: out.walks,
                tolerance: out.tolerance,
            });
            state = out.state;

            let j = match state.weights.iter().position(|&w| w == 0.0) {
                Some(j) => j,
                None => {
                    let (j, w) = state
                        .weights
                        .iter()
                        .enumerate()
                        .fold((0, f64::INFINITY), |(bj, bw), (j, &w)| if w < bw { (j, w) } else { (bj, bw) });
                    if w > ZERO_WEIGHT_TOL {
                        return Err(Error::Numerical(format!("no zero weight at vertex (min {w:e})")));
                    }
                    j
                }
            };
            perm[k - 1] = state.support.remove(j);
            state.weights.remove(j);
        }
        support = state.support;
    }
    // The surviving set fills the leading positions in ascending index order.
    for (pos, &i) in support.iter().enumerate() {
        perm[pos] = i;
    }
    for k in (1..=support.len()).rev() {
        let set_sum_norm = family.gauge().norm(family.sum_of(&support[..k]).coords());
        trace.steps.push(GsStep { k, set_sum_norm, complement_weight: None, walks: 0, tolerance: 0.0 });
    }

    let ordering = Ordering::new(perm, false)?;
    let achieved = prefix_report(family, &ordering)?.max_norm;
    Ok((OrderResult { ordering, achieved, algo: Algo::Gs, guarantee: Some(guarantee) }, trace))
}
