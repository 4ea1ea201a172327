//! Welfare accounting: exploration-benefit families, the output decomposition,
//! regime comparison, the interior welfare optimum, and the noise level that
//! implements a target dispersion.

use crate::csv::fmt_f64;
use crate::error::{Error, Result};
use crate::moments;
use crate::params::ModelParams;

/// Exploration-benefit function Ω. Every family is normalized to Ω(0) = 0,
/// nondecreasing on v ≥ 0, with an analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaSpec {
    /// Ω(v) = scale · v
    Linear { scale: f64 },
    /// Ω(v) = scale · √v
    Sqrt { scale: f64 },
    /// Ω(v) = scale · ln(1 + v)
    Log1p { scale: f64 },
    /// Ω(v) = scale · v^exponent, exponent in (0, 1]
    Power { scale: f64, exponent: f64 },
}

fn check_scale(scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "omega scale must be a positive finite number, got {scale}"
        )));
    }
    Ok(scale)
}

impl OmegaSpec {
    pub fn linear(scale: f64) -> Result<Self> {
        Ok(Self::Linear { scale: check_scale(scale)? })
    }

    pub fn sqrt(scale: f64) -> Result<Self> {
        Ok(Self::Sqrt { scale: check_scale(scale)? })
    }

    pub fn log1p(scale: f64) -> Result<Self> {
        Ok(Self::Log1p { scale: check_scale(scale)? })
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        check_scale(scale)?;
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::Domain(format!(
                "omega exponent must lie in (0, 1], got {exponent}"
            )));
        }
        Ok(Self::Power { scale, exponent })
    }
}

fn check_v(v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!(
            "dispersion must be nonnegative, got {v}"
        )));
    }
    Ok(v)
}

/// Ω(v). Errors on v < 0 (NaN included).
pub fn omega_value(spec: &OmegaSpec, v: f64) -> Result<f64> {
    let v = check_v(v)?;
    Ok(match *spec {
        OmegaSpec::Linear { scale } => scale * v,
        OmegaSpec::Sqrt { scale } => scale * v.sqrt(),
        OmegaSpec::Log1p { scale } => scale * v.ln_1p(),
        OmegaSpec::Power { scale, exponent } => scale * v.powf(exponent),
    })
}

/// Ω'(v), analytic. Returns +inf at v = 0 for the sqrt and power (exponent < 1)
/// families.
pub fn omega_deriv(spec: &OmegaSpec, v: f64) -> Result<f64> {
    let v = check_v(v)?;
    Ok(match *spec {
        OmegaSpec::Linear { scale } => scale,
        OmegaSpec::Sqrt { scale } => scale / (2.0 * v.sqrt()),
        OmegaSpec::Log1p { scale } => scale / (1.0 + v),
        OmegaSpec::Power { scale, exponent } => scale * exponent * v.powf(exponent - 1.0),
    })
}

/// Output and welfare at dispersion level v under params p.
///
/// `w` nets the dispersion cost against the exploration benefit;
/// `y_expected` additionally subtracts the stationary misallocation gap
/// E[(mean belief - theta)^2], which does not depend on v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    pub v: f64,
    pub misallocation_gap: f64,
    pub dispersion_cost: f64,
    pub exploration_benefit: f64,
    pub w: f64,
    pub y_expected: f64,
}

pub const WELFARE_CSV_HEADER: &str =
    "v,misallocation_gap,dispersion_cost,exploration_benefit,W,Y_expected";

impl WelfareReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.v),
            fmt_f64(self.misallocation_gap),
            fmt_f64(self.dispersion_cost),
            fmt_f64(self.exploration_benefit),
            fmt_f64(self.w),
            fmt_f64(self.y_expected),
        )
    }
}

/// Welfare decomposition at dispersion v. The benefit is weighted by p.gamma.
pub fn welfare(spec: &OmegaSpec, p: &ModelParams, v: f64) -> Result<WelfareReport> {
    let v = check_v(v)?;
    let benefit = p.gamma * omega_value(spec, v)?;
    let gap = moments::stationary_joint_moments(p).var_gap;
    let w = benefit - v;
    Ok(WelfareReport {
        v,
        misallocation_gap: gap,
        dispersion_cost: v,
        exploration_benefit: benefit,
        w,
        y_expected: w - gap,
    })
}

/// Welfare reports along a grid of dispersion values.
pub fn welfare_curve(spec: &OmegaSpec, p: &ModelParams, grid: &[f64]) -> Result<Vec<WelfareReport>> {
    grid.iter().map(|&v| welfare(spec, p, v)).collect()
}

pub fn write_welfare_csv<W: std::io::Write + ?Sized>(rows: &[WelfareReport], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{WELFARE_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.to_csv_row())?;
    }
    Ok(())
}

/// Welfare evaluated at the behavioral steady state (v*) and at the
/// no-experimentation benchmark (v*_eq) under the same params.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeComparison {
    pub v_star: f64,
    pub v_eq: f64,
    pub w_star: f64,
    pub w_eq: f64,
    pub dominates: bool,
}

/// Compare long-run welfare with and without experimentation noise.
/// `dominates` is strict: W(v*) > W(v*_eq).
pub fn compare_regimes(spec: &OmegaSpec, p: &ModelParams) -> Result<RegimeComparison> {
    let v_star = moments::steady_state_variance(p);
    let v_eq = moments::equilibrium_variance(p);
    let w_star = welfare(spec, p, v_star)?.w;
    let w_eq = welfare(spec, p, v_eq)?.w;
    Ok(RegimeComparison { v_star, v_eq, w_star, w_eq, dominates: w_star > w_eq })
}

const BRACKET_LO: f64 = 1e-12;
const BRACKET_HI: f64 = 1e6;
const BRACKET_POINTS: usize = 200;
const BISECT_TOL: f64 = 1e-10;

/// Locate the unique interior maximizer of W(v) = -v + gamma * Omega(v).
///
/// The first-order condition gamma * Omega'(v) = 1 is bracketed on a geometric
/// grid over [1e-12, 1e6] and solved by bisection to 1e-10 in v. Families with
/// Omega'(0) = +inf have the interiority condition checked at v = 1e-12.
///
/// Errors: `NoInteriorOptimum` when the marginal benefit never exceeds the
/// marginal cost near zero (the maximum sits at v = 0) or never falls below it
/// on the grid (no finite maximizer); `NonConcave` when the condition changes
/// sign more than once or the located stationary point is not a local maximum.
pub fn optimal_dispersion(spec: &OmegaSpec, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "gamma must be a positive finite number, got {gamma}"
        )));
    }
    let slack = |v: f64| -> Result<f64> { Ok(gamma * omega_deriv(spec, v)? - 1.0) };
    let w_of = |v: f64| -> Result<f64> { Ok(gamma * omega_value(spec, v)? - v) };

    let at_zero = omega_deriv(spec, 0.0)?;
    let origin_slack = if at_zero.is_infinite() { slack(BRACKET_LO)? } else { gamma * at_zero - 1.0 };
    if origin_slack <= 0.0 {
        return Err(Error::NoInteriorOptimum(format!(
            "marginal benefit at the origin is {:.6} <= marginal cost 1; welfare is maximized at v = 0",
            origin_slack + 1.0
        )));
    }

    let ratio = (BRACKET_HI / BRACKET_LO).powf(1.0 / (BRACKET_POINTS - 1) as f64);
    let mut bracket: Option<(f64, f64)> = None;
    let mut crossings = 0usize;
    let mut x = BRACKET_LO;
    let mut gx = slack(x)?;
    for _ in 1..BRACKET_POINTS {
        let y = x * ratio;
        let gy = slack(y)?;
        if (gx > 0.0) != (gy > 0.0) {
            crossings += 1;
            if bracket.is_none() {
                bracket = Some((x, y));
            }
        }
        x = y;
        gx = gy;
    }
    if crossings > 1 {
        return Err(Error::NonConcave(format!(
            "first-order condition changes sign {crossings} times on the bracketing grid"
        )));
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::NoInteriorOptimum(format!(
            "marginal benefit exceeds marginal cost everywhere up to v = {BRACKET_HI:e}; no finite maximizer"
        ))
    })?;

    // The crossing is downward (slack positive at the origin), so slack(lo) > 0.
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if slack(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v_opt = 0.5 * (lo + hi);
    let w_opt = w_of(v_opt)?;
    let left = w_of((v_opt - 1e-4).max(0.0))?;
    let right = w_of(v_opt + 1e-4)?;
    if w_opt < left || w_opt < right {
        return Err(Error::NonConcave(format!(
            "stationary point v = {v_opt:.6e} is not a local maximum"
        )));
    }
    Ok((v_opt, w_opt))
}

/// Experimentation noise level whose steady-state dispersion equals v_target:
/// sigma_eta = sqrt(v_target * (2*alpha - alpha^2) - alpha^2 * sigma_nu^2).
///
/// Infeasible when v_target is below the signal-noise floor v*_eq.
pub fn implied_noise(v_target: f64, p: &ModelParams) -> Result<f64> {
    let floor = moments::equilibrium_variance(p);
    if !(v_target >= floor) {
        return Err(Error::Infeasible(format!(
            "target dispersion {v_target} is below the no-experimentation floor {floor}; no nonnegative sigma_eta reaches it"
        )));
    }
    let denom = p.alpha * (2.0 - p.alpha);
    let radicand = v_target * denom - p.alpha * p.alpha * p.sigma_nu * p.sigma_nu;
    // Exactly at the floor, rounding can leave the radicand barely negative.
    Ok(radicand.max(0.0).sqrt())
}

/// Stylized exploration/misallocation tradeoff with quadratic cost:
/// net(x) = benefit_slope * x - cost_coefficient * x^2. Distinct from the
/// welfare function above, whose dispersion cost is linear; this curve is
/// kept as its own illustrative family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffSpec {
    pub benefit_slope: f64,
    pub cost_coefficient: f64,
}

impl Default for TradeoffSpec {
    fn default() -> Self {
        Self { benefit_slope: 0.6, cost_coefficient: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub x: f64,
    pub benefit: f64,
    /// Signed: nonpositive.
    pub cost: f64,
    pub net: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    /// Maximizer of the continuous net formula, benefit_slope / (2 * cost_coefficient).
    pub argmax_x: f64,
    pub net_max: f64,
}

pub const TRADEOFF_CSV_HEADER: &str = "x,benefit,cost,net";

/// Evaluate the tradeoff curve on a grid (intended range [0, 2]).
pub fn tradeoff_curve(spec: &TradeoffSpec, grid: &[f64]) -> TradeoffCurve {
    let points = grid
        .iter()
        .map(|&x| {
            let benefit = spec.benefit_slope * x;
            let cost = -spec.cost_coefficient * x * x;
            TradeoffPoint { x, benefit, cost, net: benefit + cost }
        })
        .collect();
    let argmax_x = spec.benefit_slope / (2.0 * spec.cost_coefficient);
    let net_max = spec.benefit_slope * argmax_x - spec.cost_coefficient * argmax_x * argmax_x;
    TradeoffCurve { points, argmax_x, net_max }
}

pub fn write_tradeoff_csv<W: std::io::Write + ?Sized>(curve: &TradeoffCurve, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{TRADEOFF_CSV_HEADER}")?;
    for pt in &curve.points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(pt.x),
            fmt_f64(pt.benefit),
            fmt_f64(pt.cost),
            fmt_f64(pt.net),
        )?;
    }
    Ok(())
}
