//! Unit-ball volumes, spherical-cap measures and the cone-height inequalities.
//!
//! All Gamma-function work happens in log space; values are exponentiated
//! only at the end. The cap measure
//!
//! ```text
//! σ_t = (d−1)κ_{d−1} / (d κ_d) · ∫_t^1 (1 − x²)^{(d−3)/2} dx
//! ```
//!
//! is integrated in the angular variable `x = cos θ`, where the integrand
//! becomes `sin^{d−2} θ` on `[0, arccos t]`. That form is smooth at both ends
//! for every `d ≥ 2` and is evaluated as `exp((d − 2) ln sin θ)`.

mod gamma;
mod quad;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gamma::{ln_gamma, ln_gamma_ratio};
pub use quad::{integrate, Integral};

/// The constant for which the cap estimate `σ_t ≥ t / c` is established.
pub const LEMMA_C: f64 = 140.0;

/// Dimension separating the two branches of the large-`d` argument.
pub const D0: f64 = 4e7;

const SIGMA_ABS_TOL: f64 = 1e-12;

/// `ln κ_d`, the log-volume of the Euclidean unit ball in `R^d`.
pub fn ln_unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let half = d as f64 / 2.0;
    Ok(half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0))
}

/// `κ_d = π^{d/2} / Γ(d/2 + 1)`. Fails with [`Error::Underflow`] once the value
/// leaves the normal range; use [`ln_unit_ball_volume`] there.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    let v = ln_unit_ball_volume(d)?.exp();
    if v < f64::MIN_POSITIVE {
        return Err(Error::Underflow);
    }
    Ok(v)
}

/// `ln((d−1)κ_{d−1} / (d κ_d))`, i.e. `ln((d−1)/d) − ½ ln π + ln(Γ(d/2+1)/Γ(d/2+½))`.
pub fn ln_surface_ratio(d: usize) -> Result<f64> {
    check_d(d)?;
    let df = d as f64;
    Ok(((df - 1.0) / df).ln() - 0.5 * std::f64::consts::PI.ln() + ln_gamma_ratio(df / 2.0, 0.5))
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapQuery {
    pub d: usize,
    /// Cap height parameter: the cap is `{v ∈ S^{d−1} : ⟨v, u⟩ ≥ t}`.
    pub t: f64,
}

impl CapQuery {
    pub fn new(d: usize, t: f64) -> Result<Self> {
        check_d(d)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("cap height must lie in [0, 1], got {t}")));
        }
        Ok(Self { d, t })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CapMethod {
    Quadrature,
    ClosedForm2d,
    ClosedForm3d,
    LogLowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapResult {
    /// Normalised surface measure of the cap, in `[0, 1/2]`.
    pub sigma: f64,
    pub method: CapMethod,
    pub abs_error_estimate: f64,
}

/// σ_t by adaptive quadrature.
pub fn cap_measure(q: CapQuery) -> Result<CapResult> {
    let CapQuery { d, t } = CapQuery::new(q.d, q.t)?;
    if t == 0.0 {
        return Ok(CapResult { sigma: 0.5, method: CapMethod::Quadrature, abs_error_estimate: 0.0 });
    }
    if t == 1.0 {
        return Ok(CapResult { sigma: 0.0, method: CapMethod::Quadrature, abs_error_estimate: 0.0 });
    }
    let ln_ratio = ln_surface_ratio(d)?;
    let ratio = ln_ratio.exp();
    let top = t.acos();
    let exponent = (d - 2) as f64;
    let integrand = |theta: f64| if d == 2 { 1.0 } else { (exponent * theta.sin().ln()).exp() };

    // The mass sits in a layer of width ~1/√d below `top`; cut geometrically towards it.
    let mut cuts = Vec::new();
    let mut w = 1.0 / d as f64;
    while w < top {
        cuts.push(top - w);
        w *= 2.0;
    }
    let integral = integrate(integrand, 0.0, top, &cuts, 0.5 * SIGMA_ABS_TOL / ratio);
    if !integral.converged {
        log::warn!("cap quadrature for d={d}, t={t} did not reach the requested tolerance");
    }
    let sigma = (ratio * integral.value).clamp(0.0, 0.5);
    // Relative rounding in the log-space prefactor scales with the magnitude of its terms.
    let prefactor_err = sigma * 16.0 * f64::EPSILON * (1.0 + ln_ratio.abs() + (d as f64).ln());
    Ok(CapResult {
        sigma,
        method: CapMethod::Quadrature,
        abs_error_estimate: ratio * integral.abs_error + prefactor_err,
    })
}

/// Closed forms: `arccos(t)/π` for `d = 2` and `(1 − t)/2` for `d = 3`.
pub fn cap_measure_closed_form(q: CapQuery) -> Option<CapResult> {
    let (sigma, method) = match q.d {
        2 => (q.t.acos() / std::f64::consts::PI, CapMethod::ClosedForm2d),
        3 => ((1.0 - q.t) / 2.0, CapMethod::ClosedForm3d),
        _ => return None,
    };
    Some(CapResult { sigma, method, abs_error_estimate: 2.0 * f64::EPSILON })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRatio {
    pub ratio: f64,
    pub lower: f64,
    pub ln_margin: f64,
    pub holds: bool,
}

/// Compares `(d−1)κ_{d−1}/(dκ_d)` against `√d / (2√(2π))`, in log space.
pub fn surface_ratio_bound(d: usize) -> Result<SurfaceRatio> {
    let ln_ratio = ln_surface_ratio(d)?;
    let ln_lower = 0.5 * (d as f64).ln() - (2.0 * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let ln_margin = ln_ratio - ln_lower;
    Ok(SurfaceRatio { ratio: ln_ratio.exp(), lower: ln_lower.exp(), ln_margin, holds: ln_margin >= -1e-12 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GautschiBounds {
    pub lo: f64,
    pub val: f64,
    pub hi: f64,
    /// `ln val − ln lo` and `ln hi − ln val`.
    pub ln_margins: (f64, f64),
    pub holds: bool,
}

/// `x^{1−λ} ≤ Γ(x+1)/Γ(x+λ) ≤ (x+1)^{1−λ}` for `x > 0`, `0 < λ < 1`.
pub fn gautschi_bounds(x: f64, lambda: f64) -> Result<GautschiBounds> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("x must be positive, got {x}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("λ must lie in (0, 1), got {lambda}")));
    }
    let ln_val = ln_gamma_ratio(x, lambda);
    let ln_lo = (1.0 - lambda) * x.ln();
    let ln_hi = (1.0 - lambda) * x.ln_1p();
    let ln_margins = (ln_val - ln_lo, ln_hi - ln_val);
    Ok(GautschiBounds {
        lo: ln_lo.exp(),
        val: ln_val.exp(),
        hi: ln_hi.exp(),
        ln_margins,
        holds: ln_margins.0 >= -1e-12 && ln_margins.1 >= -1e-12,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TVariant {
    /// `t = √(ln d / (2d))`.
    Standard,
    /// `t = √((ln d − 2 ln ln d) / d)`, the sharper large-`d` choice.
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoT {
    pub t: f64,
    pub variant: TVariant,
    /// Set when `Refined` was requested but infeasible and `Standard` was used.
    pub fell_back: bool,
}

pub fn auto_t(d: usize, variant: TVariant) -> Result<AutoT> {
    check_d(d)?;
    let ln_d = (d as f64).ln();
    let standard = (ln_d / (2.0 * d as f64)).sqrt();
    match variant {
        TVariant::Standard => Ok(AutoT { t: standard, variant, fell_back: false }),
        TVariant::Refined => {
            let num = ln_d - 2.0 * ln_d.ln();
            let t = (num / d as f64).sqrt();
            if num > 0.0 && t < 1.0 {
                Ok(AutoT { t, variant, fell_back: false })
            } else {
                log::warn!("refined cone height infeasible at d={d}; using the standard choice");
                Ok(AutoT { t: standard, variant: TVariant::Standard, fell_back: true })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub value: f64,
    pub ln_value: f64,
}

/// Convexity (tangent-triangle) lower bound on σ_t:
/// `(√d / (2√(2π))) · (1 − t²)^{d/2+1} / (2 d t)`.
///
/// Valid where `(1 − x²)^{d/2}` is convex on `[t, 1]`: `d ≥ 10`, `t > 1/√(d−1)`.
pub fn triangle_lower_bound(d: usize, t: f64) -> Result<LogValue> {
    if d < 10 {
        return Err(Error::InvalidParameter(format!("triangle bound needs d ≥ 10, got {d}")));
    }
    let df = d as f64;
    if !(t > 1.0 / (df - 1.0).sqrt() && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} outside the convexity window (1/√(d−1), 1]")));
    }
    let ln_value = 0.5 * df.ln() - (2.0 * (2.0 * std::f64::consts::PI).sqrt()).ln()
        + (df / 2.0 + 1.0) * (-t * t).ln_1p()
        - (2.0 * df * t).ln();
    Ok(LogValue { value: ln_value.exp(), ln_value })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDimCheck {
    pub sigma_at_least_005: bool,
    pub threshold_at_most_0004: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub d: usize,
    pub t: f64,
    pub sigma: f64,
    pub method: CapMethod,
    /// `t / 140`.
    pub threshold: f64,
    pub holds: bool,
    /// Direct numeric claims for `2 ≤ d ≤ 9`.
    pub small_d: Option<SmallDimCheck>,
    /// `ln` of the triangle lower bound, for `d ≥ 10`.
    pub ln_lower_bound: Option<f64>,
}

/// Checks `σ_t ≥ t/140` at the standard cone height.
///
/// When the quadrature value underflows, the log of the triangle lower bound is
/// compared against `ln(t/140)` instead.
pub fn lemma_c140_check(d: usize) -> Result<LemmaCheck> {
    let t = auto_t(d, TVariant::Standard)?.t;
    let threshold = t / LEMMA_C;
    let ln_lower_bound = (d >= 10).then(|| triangle_lower_bound(d, t)).transpose()?.map(|l| l.ln_value);
    let cap = cap_measure(CapQuery::new(d, t)?)?;
    let (sigma, method, holds) = if cap.sigma >= f64::MIN_POSITIVE {
        (cap.sigma, CapMethod::Quadrature, cap.sigma >= threshold)
    } else {
        let ln_lb = ln_lower_bound.ok_or(Error::Underflow)?;
        (ln_lb.exp(), CapMethod::LogLowerBound, ln_lb >= threshold.ln())
    };
    let small_d = (d <= 9).then_some(SmallDimCheck {
        sigma_at_least_005: sigma >= 0.05,
        threshold_at_most_0004: threshold <= 0.004,
    });
    let holds = holds && small_d.is_none_or(|s| s.sigma_at_least_005 && s.threshold_at_most_0004);
    Ok(LemmaCheck { d, t, sigma, method, threshold, holds, small_d, ln_lower_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`, oriented so that a positive margin means the link holds.
    pub margin: f64,
    pub holds: bool,
}

impl ChainLink {
    fn at_least(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        Self { name: name.into(), lhs, rhs, margin, holds: margin > 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub d: u64,
    pub links: Vec<ChainLink>,
    /// Whether the `d ≥ d₀` branch was evaluated.
    pub large_branch: bool,
    /// Whether the `d ≤ d₀` branch was evaluated.
    pub small_branch: bool,
    pub holds: bool,
}

/// Evaluates each step of the large-`d` argument for `σ_t ≥ t/140` at the
/// standard cone height.
pub fn inequality_chain_check(d: u64) -> Result<ChainReport> {
    if d < 10 {
        return Err(Error::InvalidParameter(format!("the chain is stated for d ≥ 10, got {d}")));
    }
    let d = d as f64;
    let ln_d = d.ln();
    let lnln_d = ln_d.ln();
    let c = LEMMA_C;
    let ln_2c13 = (2.0 * c / 13.0).ln();
    let t = (ln_d / (2.0 * d)).sqrt();
    let eps = ln_d / (2.0 * d);
    let two_sqrt_2pi = 2.0 * (2.0 * std::f64::consts::PI).sqrt();

    let mut links = Vec::new();
    let gautschi = gautschi_bounds(d / 2.0, 0.5)?;
    links.push(ChainLink::at_least("gautschi_lower", gautschi.ln_margins.0, 0.0));
    links.push(ChainLink::at_least("gautschi_upper", gautschi.ln_margins.1, 0.0));
    // (d−1)κ_{d−1}/(dκ_d) ≥ √d/(2√(2π)), in logs.
    let ln_ratio = ((d - 1.0) / d).ln() - 0.5 * std::f64::consts::PI.ln() + ln_gamma_ratio(d / 2.0, 0.5);
    links.push(ChainLink::at_least("surface_ratio", ln_ratio, 0.5 * ln_d - two_sqrt_2pi.ln()));
    links.push(ChainLink::at_least("convexity_window", t, 1.0 / (d - 1.0).sqrt()));
    links.push(ChainLink::at_least("t_squared_below_fifth", 0.2, t * t));
    links.push(ChainLink::at_least("constant_13", 1.0 / (5.0 * (2.0 * std::f64::consts::PI).sqrt()), 1.0 / 13.0));
    // ln(1 − ε) > −ε/(1 − ε).
    links.push(ChainLink::at_least("log_one_minus", (-eps).ln_1p(), -eps / (1.0 - eps)));
    links.push(ChainLink::at_least("five_sixths", 1.0 - eps, 5.0 / 6.0));
    links.push(ChainLink::at_least("logineq", d / 2.0 * (-eps).ln_1p(), -ln_2c13 + lnln_d - 0.5 * ln_d));
    links.push(ChainLink::at_least("referenced", 5.0 / 3.0 * (ln_d - 2.0 * lnln_d + 2.0 * ln_2c13), ln_d));
    // ln σ_t ≥ ln(triangle bound) ≥ ln(t/c).
    let triangle = triangle_lower_bound_f(d, t);
    links.push(ChainLink::at_least("triangle_vs_threshold", triangle, (t / c).ln()));

    let large_branch = d >= D0;
    let small_branch = d <= D0;
    let mut branch_ok = false;
    if large_branch {
        let l = ChainLink::at_least("branch_large_loglog", ln_d / 5.0, lnln_d);
        branch_ok |= l.holds;
        links.push(l);
    }
    if small_branch {
        let a = ChainLink::at_least("branch_small_loglog", 3.0, lnln_d);
        let b = ChainLink::at_least("branch_small_constant", ln_2c13, 3.0);
        branch_ok |= a.holds && b.holds;
        links.push(a);
        links.push(b);
    }
    let holds = branch_ok
        && links
            .iter()
            .filter(|l| !l.name.starts_with("branch_"))
            .all(|l| l.holds);
    Ok(ChainReport { d: d as u64, links, large_branch, small_branch, holds })
}

fn triangle_lower_bound_f(d: f64, t: f64) -> f64 {
    0.5 * d.ln() - (2.0 * (2.0 * std::f64::consts::PI).sqrt()).ln() + (d / 2.0 + 1.0) * (-t * t).ln_1p()
        - (2.0 * d * t).ln()
}
