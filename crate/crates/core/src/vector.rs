//! Dense vectors, ℓp gauges, vector families and prefix-sum evaluation.
//!
//! Sums over families use fixed-order pairwise (tree) summation so that results
//! are deterministic and the rounding error grows like `O(log n)` rather than
//! `O(n)`. Prefix sums are assembled from aligned power-of-two blocks of the
//! permuted sequence, each block summed pairwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for comparisons against analytic thresholds.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn euclidean(&self) -> f64 {
        euclidean(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|x| -x).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// `self / |self|`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.euclidean();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclidean(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Norm generated by the unit ball of an ℓp space.
///
/// `Euclidean` and `Lp(2.0)` evaluate through the same code path and give
/// bit-identical results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gauge {
    Euclidean,
    Lp(f64),
    Infinity,
}

impl Gauge {
    /// Validated constructor; `p = +inf` maps to [`Gauge::Infinity`].
    pub fn lp(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Gauge::Infinity);
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("ℓp exponent must lie in [1, ∞], got {p}")));
        }
        Ok(Gauge::Lp(p))
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Gauge::Euclidean) || matches!(self, Gauge::Lp(p) if *p == 2.0)
    }

    /// The exponent `p`, with `f64::INFINITY` for the max norm.
    pub fn exponent(&self) -> f64 {
        match *self {
            Gauge::Euclidean => 2.0,
            Gauge::Lp(p) => p,
            Gauge::Infinity => f64::INFINITY,
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match *self {
            Gauge::Euclidean => euclidean(x),
            Gauge::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Gauge::Lp(2.0) => euclidean(x),
            Gauge::Lp(1.0) => x.iter().map(|v| v.abs()).sum(),
            Gauge::Lp(p) => {
                let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

pub fn gauge_norm(v: &Vector, g: Gauge) -> f64 {
    g.norm(v.coords())
}

/// Componentwise pairwise sum of a list of equal-length slices.
pub(crate) fn pairwise_sum(items: &[&[f64]], dim: usize) -> Vec<f64> {
    match items.len() {
        0 => vec![0.0; dim],
        1 => items[0].to_vec(),
        len => {
            let (lo, hi) = items.split_at(len / 2);
            let mut a = pairwise_sum(lo, dim);
            let b = pairwise_sum(hi, dim);
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        }
    }
}

/// All prefix sums of `items`, each built from aligned power-of-two blocks.
pub(crate) fn blocked_prefix_sums(items: &[&[f64]], dim: usize) -> Vec<Vec<f64>> {
    let n = items.len();
    let mut levels: Vec<Vec<Vec<f64>>> = vec![items.iter().map(|s| s.to_vec()).collect()];
    while levels.last().map_or(0, |l| l.len()) >= 2 {
        let prev = levels.last().unwrap();
        let next = prev
            .chunks_exact(2)
            .map(|pair| pair[0].iter().zip(&pair[1]).map(|(a, b)| a + b).collect())
            .collect();
        levels.push(next);
    }
    (1..=n)
        .map(|k| {
            let mut acc = vec![0.0; dim];
            let mut start = 0usize;
            for b in (0..levels.len()).rev() {
                if k & (1 << b) != 0 {
                    for (a, x) in acc.iter_mut().zip(&levels[b][start >> b]) {
                        *a += x;
                    }
                    start += 1 << b;
                }
            }
            acc
        })
        .collect()
}

/// A finite indexed list of vectors sharing a dimension and a gauge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFamily {
    dim: usize,
    gauge: Gauge,
    vectors: Vec<Vector>,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vector>, gauge: Gauge) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
        }
        Ok(Self { dim, gauge, vectors })
    }

    /// Builds a Euclidean family from raw coordinate rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).ok_or(Error::EmptyFamily)?;
        let vectors = rows.into_iter().map(Vector::new).collect::<Result<Vec<_>>>()?;
        Self::new(dim, vectors, Gauge::Euclidean)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> &Vector {
        &self.vectors[i]
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    /// Norm of `v` in this family's gauge, checking that `v` lives in the same space.
    pub fn norm_of(&self, v: &Vector) -> Result<f64> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        Ok(self.gauge.norm(v.coords()))
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.gauge.norm(self.vectors[i].coords())
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.norm(i)).collect()
    }

    /// Largest gauge norm in the family (0 for an empty family).
    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            gauge: self.gauge,
            vectors: self.vectors.iter().map(|v| v.scaled(s)).collect(),
        }
    }

    /// Rescales so the largest gauge norm equals 1. Families of zero vectors are returned as-is.
    pub fn normalized_to_unit_ball(&self) -> Self {
        let m = self.max_norm();
        if m > 0.0 {
            self.scaled(1.0 / m)
        } else {
            self.clone()
        }
    }

    /// The sub-family at `indices`, in the given order.
    pub fn subfamily(&self, indices: &[usize]) -> Self {
        Self {
            dim: self.dim,
            gauge: self.gauge,
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }

    /// Pairwise sum of the vectors at `indices`, taken in the given order.
    pub fn sum_of(&self, indices: &[usize]) -> Vector {
        let items: Vec<&[f64]> = indices.iter().map(|&i| self.vectors[i].coords()).collect();
        Vector(pairwise_sum(&items, self.dim))
    }

    pub fn sum(&self) -> Result<Vector> {
        family_sum(self)
    }

    /// Errors unless `|Σ(V)| ≤ tol · max_norm` (relative, so the check is scale-free).
    pub fn check_zero_sum(&self, tol: f64) -> Result<()> {
        let norm = self.gauge.norm(self.sum()?.coords());
        let limit = tol * self.max_norm();
        if norm > limit {
            return Err(Error::NotZeroSum { norm, tol: limit });
        }
        Ok(())
    }

    pub fn check_unit_ball(&self, tol: f64) -> Result<()> {
        for i in 0..self.len() {
            let norm = self.norm(i);
            if norm > 1.0 + tol {
                return Err(Error::NormExceeded { index: i, norm, limit: 1.0 + tol });
            }
        }
        Ok(())
    }
}

/// Σ(V), summed pairwise in index order.
pub fn family_sum(family: &VectorFamily) -> Result<Vector> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let idx: Vec<usize> = (0..family.len()).collect();
    Ok(family.sum_of(&idx))
}

/// Replaces each `v` by `v − Σ(V)/n`.
pub fn center_family(family: &VectorFamily) -> Result<VectorFamily> {
    let mean = family_sum(family)?.scaled(1.0 / family.len() as f64);
    let vectors = family.vectors.iter().map(|v| v.sub(&mean)).collect();
    Ok(VectorFamily { dim: family.dim, gauge: family.gauge, vectors })
}

/// A permutation of family indices together with the evaluation mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub perm: Vec<usize>,
    /// Evaluate drift-adjusted prefixes `Σ_{i≤k} v_i − (k/n)Σ(V)` instead of plain ones.
    pub drift: bool,
}

impl Ordering {
    pub fn new(perm: Vec<usize>, drift: bool) -> Result<Self> {
        let o = Self { perm, drift };
        o.validate(o.perm.len())?;
        Ok(o)
    }

    pub fn identity(n: usize, drift: bool) -> Self {
        Self { perm: (0..n).collect(), drift }
    }

    pub fn with_drift(mut self, drift: bool) -> Self {
        self.drift = drift;
        self
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Checks that `perm` is a bijection on `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.perm.len() != n {
            return Err(Error::InvalidOrdering(format!(
                "permutation has length {}, family has {n} vectors",
                self.perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in &self.perm {
            if i >= n {
                return Err(Error::InvalidOrdering(format!("index {i} out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidOrdering(format!("index {i} repeated")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub max_norm: f64,
    /// 1-based position of the first prefix attaining `max_norm`.
    pub argmax_k: usize,
    pub per_prefix_norms: Vec<f64>,
    pub drift: bool,
}

/// Prefix vectors `Σ_{i≤k} v_{perm(i)}` (drift-adjusted when `o.drift`), k = 1..n.
pub fn prefix_vectors(family: &VectorFamily, o: &Ordering) -> Result<Vec<Vector>> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    o.validate(family.len())?;
    let items: Vec<&[f64]> = o.perm.iter().map(|&i| family.vectors[i].coords()).collect();
    let mut prefixes = blocked_prefix_sums(&items, family.dim);
    if o.drift {
        let n = prefixes.len();
        let total = prefixes[n - 1].clone();
        for (k, p) in prefixes.iter_mut().enumerate() {
            let frac = (k + 1) as f64 / n as f64;
            for (x, t) in p.iter_mut().zip(&total) {
                *x -= frac * t;
            }
        }
    }
    Ok(prefixes.into_iter().map(Vector).collect())
}

pub fn prefix_report(family: &VectorFamily, o: &Ordering) -> Result<PrefixReport> {
    let per_prefix_norms: Vec<f64> = prefix_vectors(family, o)?
        .iter()
        .map(|p| family.gauge.norm(p.coords()))
        .collect();
    let (argmax, max_norm) = per_prefix_norms
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bm), (i, &x)| if x > bm { (i, x) } else { (bi, bm) });
    Ok(PrefixReport { max_norm, argmax_k: argmax + 1, per_prefix_norms, drift: o.drift })
}
