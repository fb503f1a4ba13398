//! Log-space Gamma function helpers.

pub use statrs::function::gamma::ln_gamma;

/// Stirling-series coefficients `B_{2k} / (2k (2k − 1))`, k = 1..5.
const STIRLING: [f64; 5] = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0];

/// `ln Γ(x + 1) − ln Γ(x + λ)` for `x > 0`, `0 ≤ λ ≤ 1`.
///
/// For large `x` the two log-gammas are huge and nearly equal, so the
/// difference is taken term by term in the Stirling series instead.
pub fn ln_gamma_ratio(x: f64, lambda: f64) -> f64 {
    if x < 20.0 {
        return ln_gamma(x + 1.0) - ln_gamma(x + lambda);
    }
    let z1 = x + 1.0;
    let z2 = x + lambda;
    let gap = 1.0 - lambda;
    let mut acc = gap * z2.ln() + (z1 - 0.5) * (gap / z2).ln_1p() - gap;
    for (k, c) in STIRLING.iter().enumerate() {
        let p = (2 * k + 1) as i32;
        acc += c * (z1.powi(-p) - z2.powi(-p));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((ln_gamma(1.5) - (std::f64::consts::PI.sqrt() / 2.0).ln()).abs() < 1e-14);
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!((ln_gamma(11.0) - 3628800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ratio_agrees_with_direct_difference() {
        for x in [20.0, 25.5, 40.0, 100.0, 333.3, 1000.0] {
            for lambda in [0.1, 0.5, 0.9] {
                let direct = ln_gamma(x + 1.0) - ln_gamma(x + lambda);
                let series = ln_gamma_ratio(x, lambda);
                assert!((direct - series).abs() < 1e-12 * direct.abs().max(1.0), "x={x} λ={lambda}");
            }
        }
    }

    #[test]
    fn ratio_asymptotics() {
        // Γ(x + 1)/Γ(x + 1/2) = √x (1 + 1/(8x) + 1/(128x²) + …)
        let x: f64 = 5e7;
        let expect = 0.5 * x.ln() + (1.0 / (8.0 * x) + 1.0 / (128.0 * x * x)).ln_1p();
        assert!((ln_gamma_ratio(x, 0.5) - expect).abs() < 1e-15);
    }
}
