//! Deterministic quasi-uniform directions on the sphere.
//!
//! Points of the Kronecker sequence `frac(x₀ + i·α)` with `α_j = φ_d^{−(j+1)}`,
//! `φ_d` the positive root of `x^{d+1} = x + 1`, are pushed through the normal
//! quantile coordinatewise and normalised. The start `x₀` is drawn from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

use crate::vector::euclidean;

fn generalized_golden_ratio(d: usize) -> f64 {
    let k = (d + 1) as i32;
    let mut x = 2.0f64;
    for _ in 0..64 {
        let step = (x.powi(k) - x - 1.0) / (k as f64 * x.powi(k - 1) - 1.0);
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// `count` directions followed by their `count` antipodes.
pub fn quasi_uniform_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let phi = generalized_golden_ratio(d);
    let alpha: Vec<f64> = (1..=d).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(2 * count);
    let mut i = 0u64;
    while out.len() < count {
        i += 1;
        let point: Vec<f64> = start
            .iter()
            .zip(&alpha)
            .map(|(x0, a)| normal_quantile((x0 + i as f64 * a).fract().clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        let norm = euclidean(&point);
        if norm > 1e-12 {
            out.push(point.into_iter().map(|x| x / norm).collect());
        }
    }
    let antipodes: Vec<Vec<f64>> = out.iter().map(|u| u.iter().map(|x| -x).collect()).collect();
    out.extend(antipodes);
    out
}
