//! Checks that no ball-cone captures a large sum from the residual.
//!
//! A set of nonzero vectors fits in a common cone `K_t(u)` iff
//! `max_{|u|=1} min_v ⟨v/|v|, u⟩ ≥ t`, and that max-min equals the distance from
//! the origin to the convex hull of the unit directions. In the plane this is an
//! arc-covering question; in higher dimension the nearest hull point is found
//! exactly by enumerating affinely independent faces of at most `d + 1` points.

use serde::{Deserialize, Serialize};

use super::{directions::quasi_uniform_directions, scan_slice, WitnessSearchConfig, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::vector::{dot, euclidean, VectorFamily};

/// Largest residual handled by exhaustive verification.
pub const EXACT_MAX_RESIDUAL: usize = 12;
/// Largest dimension handled by exhaustive verification.
pub const EXACT_MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerifyMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub mode: VerifyMode,
    /// No cone-feasible subset with `|Σ| ≥ 1/ε` was found.
    pub holds: bool,
    /// Cone-feasible subsets examined (exact) or directions tried (sampled).
    pub checked: usize,
    /// Largest captured sum norm seen.
    pub max_cone_sum: f64,
    /// A violating subset, when one was found.
    pub witness: Option<Vec<usize>>,
}

pub fn verify_residual(
    family: &VectorFamily,
    residual: &[usize],
    eps: f64,
    t: f64,
    mode: VerifyMode,
    cfg: &WitnessSearchConfig,
) -> Result<ResidualReport> {
    super::check_eps_t(eps, t)?;
    let members: Vec<usize> = residual.iter().copied().filter(|&i| !family.get(i).is_zero()).collect();
    match mode {
        VerifyMode::Exact => exact(family, &members, eps, t),
        VerifyMode::Sampled => Ok(sampled(family, &members, eps, t, cfg)),
    }
}

fn exact(family: &VectorFamily, members: &[usize], eps: f64, t: f64) -> Result<ResidualReport> {
    let d = family.dim();
    if members.len() > EXACT_MAX_RESIDUAL {
        return Err(Error::TooLarge { n: members.len(), cap: EXACT_MAX_RESIDUAL });
    }
    if d > EXACT_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "exact residual verification supports d ≤ {EXACT_MAX_DIM}, got {d}"
        )));
    }
    let units: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| family.get(i).normalized().expect("zero vectors filtered").into_coords())
        .collect();
    let mut search = Exhaustive {
        family,
        members,
        units: &units,
        t,
        limit: 1.0 / eps,
        planar: d == 2,
        checked: 0,
        max_cone_sum: 0.0,
        witness: None,
    };
    search.extend(&mut Vec::new(), f64::INFINITY, 0);
    Ok(ResidualReport {
        mode: VerifyMode::Exact,
        holds: search.witness.is_none(),
        checked: search.checked,
        max_cone_sum: search.max_cone_sum,
        witness: search.witness,
    })
}

/// Depth-first enumeration of cone-feasible subsets. Feasibility is inherited
/// by subsets, so infeasible branches are cut.
struct Exhaustive<'a> {
    family: &'a VectorFamily,
    members: &'a [usize],
    units: &'a [Vec<f64>],
    t: f64,
    limit: f64,
    planar: bool,
    checked: usize,
    max_cone_sum: f64,
    witness: Option<Vec<usize>>,
}

impl Exhaustive<'_> {
    fn extend(&mut self, chosen: &mut Vec<usize>, dist: f64, start: usize) {
        for j in start..self.members.len() {
            if self.witness.is_some() {
                return;
            }
            chosen.push(j);
            let feasible_dist = if self.planar {
                arc_fits(chosen.iter().map(|&k| self.units[k].as_slice()), self.t).then_some(dist)
            } else {
                let next = dist.min(hull_distance_with(self.units, chosen));
                (next >= self.t - MEMBERSHIP_TOL).then_some(next)
            };
            if let Some(next) = feasible_dist {
                self.checked += 1;
                let indices: Vec<usize> = chosen.iter().map(|&k| self.members[k]).collect();
                let norm = self.family.sum_of(&indices).euclidean();
                self.max_cone_sum = self.max_cone_sum.max(norm);
                if norm >= self.limit {
                    self.witness = Some(indices);
                } else {
                    self.extend(chosen, next, j + 1);
                }
            }
            chosen.pop();
        }
    }
}

/// Whether unit vectors in the plane fit in an arc of half-width `arccos t`.
fn arc_fits<'a>(units: impl Iterator<Item = &'a [f64]>, t: f64) -> bool {
    let mut angles: Vec<f64> = units.map(|u| u[1].atan2(u[0])).collect();
    angles.sort_by(f64::total_cmp);
    let tau = 2.0 * std::f64::consts::PI;
    let mut gap = angles[0] + tau - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let span = tau - gap;
    (0.5 * span).cos() >= t - MEMBERSHIP_TOL
}

/// Distance from the origin to the nearest hull point lying on a face that
/// contains the last chosen point. Faces without it belong to the smaller set.
fn hull_distance_with(units: &[Vec<f64>], chosen: &[usize]) -> f64 {
    let (&last, rest) = chosen.split_last().expect("nonempty");
    let d = units[last].len();
    let mut best = euclidean(&units[last]);
    let mut face = vec![last];
    combinations(rest, d, &mut face, &mut |face| {
        if let Some(p) = affine_nearest(units, face) {
            best = best.min(euclidean(&p));
        }
    });
    best
}

fn combinations(pool: &[usize], max_extra: usize, face: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    for (pos, &k) in pool.iter().enumerate() {
        if face.len() > max_extra {
            return;
        }
        face.push(k);
        visit(face);
        combinations(&pool[pos + 1..], max_extra, face, visit);
        face.pop();
    }
}

/// Nearest point to the origin in the affine hull of the face, if it lies in
/// the face's convex hull (nonnegative barycentric weights) and the face is
/// affinely independent.
fn affine_nearest(units: &[Vec<f64>], face: &[usize]) -> Option<Vec<f64>> {
    let s = face.len();
    let n = s + 1;
    // KKT system [G 1; 1ᵀ 0] [λ; μ] = [0; 1].
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..s {
        for j in 0..s {
            a[i * n + j] = dot(&units[face[i]], &units[face[j]]);
        }
        a[i * n + s] = 1.0;
        a[s * n + i] = 1.0;
    }
    b[s] = 1.0;
    let x = solve(&mut a, &mut b, n)?;
    let lambda = &x[..s];
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    let mut p = vec![0.0; units[face[0]].len()];
    for (&l, &k) in lambda.iter().zip(face) {
        for (pi, ui) in p.iter_mut().zip(&units[k]) {
            *pi += l * ui;
        }
    }
    Some(p)
}

/// Gaussian elimination with partial pivoting; `None` when near singular.
fn solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}

fn sampled(family: &VectorFamily, members: &[usize], eps: f64, t: f64, cfg: &WitnessSearchConfig) -> ResidualReport {
    let limit = 1.0 / eps;
    let mut directions = quasi_uniform_directions(family.dim(), cfg.random_directions, cfg.seed);
    directions.extend(members.iter().map(|&i| family.get(i).normalized().expect("nonzero").into_coords()));
    let mut max_cone_sum = 0.0f64;
    let mut witness = None;
    for u in &directions {
        let (slice, norm) = scan_slice(family, members, u, t, cfg.subset_bruteforce_cap.min(20));
        max_cone_sum = max_cone_sum.max(norm);
        if norm >= limit {
            witness = Some(slice);
            break;
        }
    }
    if witness.is_some() {
        log::warn!("sampled residual check found a cone with sum ≥ 1/ε = {limit}");
    }
    ResidualReport {
        mode: VerifyMode::Sampled,
        holds: witness.is_none(),
        checked: directions.len(),
        max_cone_sum,
        witness,
    }
}
