//! Seedable instance generators.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64`, so every generator is a
//! pure function of its arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{oracle_order, DEFAULT_ORACLE_CAP};
use crate::vector::{center_family, Gauge, Vector, VectorFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radial {
    /// Unit radii.
    Sphere,
    /// Radii `U^(1/d)`, i.e. uniform in the ball.
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Simplex,
    RandomZeroSum,
    L1Adversarial,
    Hadamard,
    NearUnit,
    TwoDir,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub d: usize,
    /// Family size (`RandomZeroSum`, `NearUnit`) or copies per direction (`TwoDir`).
    pub n: usize,
    /// Norm window width, `NearUnit` only.
    pub eps: f64,
    pub seed: u64,
    pub radial: Radial,
}

impl GenSpec {
    pub fn generate(&self) -> Result<VectorFamily> {
        match self.kind {
            GenKind::Simplex => gen_simplex(self.d),
            GenKind::RandomZeroSum => gen_random_zero_sum(self.d, self.n, self.seed, self.radial),
            GenKind::L1Adversarial => Ok(gen_l1_adversarial(self.d)?.family),
            GenKind::Hadamard => Ok(gen_hadamard(self.d)?.family),
            GenKind::NearUnit => gen_near_unit(self.d, self.n, self.eps, self.seed),
            GenKind::TwoDir => gen_two_dir(self.d, self.n),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Vertices of the regular simplex centred at the origin: `d + 1` unit vectors
/// with pairwise inner product `−1/d`.
pub fn gen_simplex(d: usize) -> Result<VectorFamily> {
    check_dim(d)?;
    // Coordinates of the centred standard basis of R^{d+1} in the Helmert basis
    // of the hyperplane orthogonal to (1, …, 1).
    let scale = ((d + 1) as f64 / d as f64).sqrt();
    let vectors = (0..=d)
        .map(|i| {
            let coords = (1..=d)
                .map(|k| {
                    let norm = ((k * (k + 1)) as f64).sqrt();
                    let entry = match i.cmp(&k) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -(k as f64),
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    scale * entry / norm
                })
                .collect();
            Vector::new(coords)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorFamily::new(d, vectors, Gauge::Euclidean)
}

fn gaussian_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::vector::euclidean(&g);
        if n > 1e-300 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Random zero-sum family: Gaussian directions, unit or ball-uniform radii,
/// mean removed, then rescaled so the largest Euclidean norm is exactly 1.
pub fn gen_random_zero_sum(d: usize, n: usize, seed: u64, radial: Radial) -> Result<VectorFamily> {
    check_dim(d)?;
    if n < 2 {
        return Err(Error::InvalidParameter("a random zero-sum family needs n ≥ 2".into()));
    }
    for attempt in 0u64..16 {
        let sub_seed = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let vectors = (0..n)
            .map(|_| {
                let dir = gaussian_direction(&mut rng, d);
                let r = match radial {
                    Radial::Sphere => 1.0,
                    Radial::Ball => rng.random::<f64>().powf(1.0 / d as f64),
                };
                Vector::new(dir.into_iter().map(|x| x * r).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let centered = center_family(&VectorFamily::new(d, vectors, Gauge::Euclidean)?)?;
        if centered.max_norm() > 1e-9 {
            return Ok(centered.normalized_to_unit_ball());
        }
    }
    Err(Error::Numerical("degenerate draws for every derived sub-seed".into()))
}

/// A generated family together with its measured optimal ordering value.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredFamily {
    pub family: VectorFamily,
    /// Exact optimum over all orderings, when the family is small enough for the oracle.
    pub oracle: Option<f64>,
    /// The literature lower bound this construction is compared against.
    pub target: f64,
}

/// Signed basis pattern in ℓ1: `e_1, …, e_d` balanced by `d` copies of
/// `−(1/d)(1, …, 1)`. All vectors have ℓ1 norm 1 and the family sums to zero.
///
/// This is a search candidate: the reported oracle value is measured, not
/// promised to reach `(d + 1)/2`.
pub fn gen_l1_adversarial(d: usize) -> Result<MeasuredFamily> {
    check_dim(d)?;
    let mut vectors: Vec<Vector> = (0..d).map(|i| Vector::basis(d, i)).collect();
    let balance = Vector::new(vec![-1.0 / d as f64; d])?;
    vectors.extend(std::iter::repeat_n(balance, d));
    let family = VectorFamily::new(d, vectors, Gauge::Lp(1.0))?;
    let oracle = measure(&family)?;
    Ok(MeasuredFamily { family, oracle, target: (d as f64 + 1.0) / 2.0 })
}

fn measure(family: &VectorFamily) -> Result<Option<f64>> {
    if family.len() > DEFAULT_ORACLE_CAP {
        return Ok(None);
    }
    Ok(Some(oracle_order(family, false, DEFAULT_ORACLE_CAP)?.achieved))
}

/// Sylvester–Hadamard matrix of order `d` (a power of two), entries ±1.
pub fn sylvester_hadamard(d: usize) -> Result<Vec<Vec<i64>>> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("Hadamard order must be a power of 2, got {d}")));
    }
    let mut h = vec![vec![1i64]];
    while h.len() < d {
        let m = h.len();
        let mut next = vec![vec![0i64; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    Ok(h)
}

/// Rows of the Sylvester–Hadamard matrix and their negations, under the ℓ∞ gauge.
/// The oracle value is measured for `d ≤ 4`.
pub fn gen_hadamard(d: usize) -> Result<MeasuredFamily> {
    let h = sylvester_hadamard(d)?;
    for (i, ri) in h.iter().enumerate() {
        for (j, rj) in h.iter().enumerate() {
            let g: i64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            let expect = if i == j { d as i64 } else { 0 };
            if g != expect {
                return Err(Error::Postcondition(format!("Hadamard Gram entry ({i},{j}) = {g}")));
            }
        }
    }
    let mut vectors = Vec::with_capacity(2 * d);
    for row in &h {
        vectors.push(Vector::new(row.iter().map(|&x| x as f64).collect())?);
    }
    for row in &h {
        vectors.push(Vector::new(row.iter().map(|&x| -x as f64).collect())?);
    }
    let family = VectorFamily::new(d, vectors, Gauge::Infinity)?;
    let oracle = if d <= 4 { measure(&family)? } else { None };
    Ok(MeasuredFamily { family, oracle, target: (d as f64).sqrt() })
}

/// `n` vectors with uniform directions and Euclidean norms uniform in `[1 − eps, 1]`.
pub fn gen_near_unit(d: usize, n: usize, eps: f64, seed: u64) -> Result<VectorFamily> {
    check_dim(d)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..n)
        .map(|_| {
            let dir = gaussian_direction(&mut rng, d);
            let r = 1.0 - eps * rng.random::<f64>();
            Vector::new(dir.into_iter().map(|x| x * r).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    VectorFamily::new(d, vectors, Gauge::Euclidean)
}

/// `m` copies of `e_1` followed by `m` copies of `−e_1`.
pub fn gen_two_dir(d: usize, m: usize) -> Result<VectorFamily> {
    check_dim(d)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let e = Vector::basis(d, 0);
    let mut vectors = vec![e.clone(); m];
    vectors.extend(std::iter::repeat_n(e.neg(), m));
    VectorFamily::new(d, vectors, Gauge::Euclidean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::family_sum;

    #[test]
    fn simplex_geometry() {
        let s1 = gen_simplex(1).unwrap();
        assert_eq!(s1.get(0).coords(), &[1.0]);
        assert_eq!(s1.get(1).coords(), &[-1.0]);
        for d in 1..=8 {
            let s = gen_simplex(d).unwrap();
            assert_eq!(s.len(), d + 1);
            for i in 0..=d {
                assert!((s.get(i).euclidean() - 1.0).abs() < 1e-12);
                for j in 0..i {
                    assert!((s.get(i).dot(s.get(j)) + 1.0 / d as f64).abs() < 1e-12);
                }
            }
            assert!(family_sum(&s).unwrap().euclidean() < 1e-12);
        }
    }

    #[test]
    fn random_zero_sum_properties() {
        let two = gen_random_zero_sum(3, 2, 11, Radial::Sphere).unwrap();
        assert!(two.get(0).add(two.get(1)).euclidean() < 1e-15);
        assert!((two.get(0).euclidean() - 1.0).abs() < 1e-15);

        let a = gen_random_zero_sum(4, 25, 99, Radial::Ball).unwrap();
        let b = gen_random_zero_sum(4, 25, 99, Radial::Ball).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random_zero_sum(4, 25, 100, Radial::Ball).unwrap());
        assert!(family_sum(&a).unwrap().euclidean() <= 1e-12 * 25.0);
        assert!((a.max_norm() - 1.0).abs() < 1e-15);
        assert!(gen_random_zero_sum(4, 1, 0, Radial::Ball).is_err());
    }

    #[test]
    fn hadamard_construction() {
        let h2 = gen_hadamard(2).unwrap();
        let rows: Vec<&[f64]> = h2.family.vectors().iter().map(|v| v.coords()).collect();
        assert_eq!(rows, vec![&[1.0, 1.0][..], &[1.0, -1.0], &[-1.0, -1.0], &[-1.0, 1.0]]);
        assert_eq!(family_sum(&h2.family).unwrap().coords(), &[0.0, 0.0]);
        assert!(h2.oracle.unwrap() <= 1.5 + 1e-9);

        let h4 = gen_hadamard(4).unwrap();
        assert_eq!(h4.family.len(), 8);
        assert!(h4.family.vectors().iter().flat_map(|v| v.coords()).all(|x| x.abs() == 1.0));
        assert!(h4.oracle.is_some());
        assert!(gen_hadamard(8).unwrap().oracle.is_none());
        assert!(gen_hadamard(3).is_err());
    }

    #[test]
    fn l1_adversarial_reports_oracle() {
        let one = gen_l1_adversarial(1).unwrap();
        assert_eq!(one.family.len(), 2);
        assert_eq!(one.family.get(0).coords(), &[1.0]);
        assert_eq!(one.family.get(1).coords(), &[-1.0]);
        assert_eq!(one.oracle, Some(1.0));
        assert_eq!(one.target, 1.0);
        for d in 2..=3 {
            let m = gen_l1_adversarial(d).unwrap();
            assert!(m.family.norms().iter().all(|&x| (x - 1.0).abs() < 1e-15));
            assert!(family_sum(&m.family).unwrap().coords().iter().all(|x| x.abs() < 1e-15));
            // Informational only: the construction is not promised to reach the bound.
            assert!(m.oracle.unwrap() >= 1.0);
        }
    }

    #[test]
    fn near_unit_window() {
        let f = gen_near_unit(5, 50, 1e-12, 3).unwrap();
        assert!(f.norms().iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let g = gen_near_unit(5, 50, 0.3, 3).unwrap();
        assert!(g.norms().iter().all(|&x| (0.7 - 1e-12..=1.0 + 1e-12).contains(&x)));
        assert_eq!(g, gen_near_unit(5, 50, 0.3, 3).unwrap());
    }

    #[test]
    fn two_dir_sums_exactly_to_zero() {
        for m in 1..6 {
            let f = gen_two_dir(3, m).unwrap();
            assert_eq!(f.len(), 2 * m);
            assert_eq!(family_sum(&f).unwrap().coords(), &[0.0, 0.0, 0.0]);
            assert_eq!(oracle_order(&f, false, 20).unwrap().achieved, 1.0);
        }
    }

    #[test]
    fn spec_dispatch() {
        let spec = GenSpec { kind: GenKind::Simplex, d: 3, n: 0, eps: 0.0, seed: 0, radial: Radial::Sphere };
        assert_eq!(spec.generate().unwrap().len(), 4);
    }
}
