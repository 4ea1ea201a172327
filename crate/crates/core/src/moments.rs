//! Exact analytical layer: moment recursions, stationary dispersion, the
//! noise-free benchmark, and the stationary second moments of the joint
//! (fundamental, mean-belief) system.
//!
//! The cross-sectional mean belief follows
//! `m' = (1 - alpha) m + alpha theta` and the cross-sectional dispersion
//! follows `v' = (1 - alpha)^2 v + alpha^2 sigma_nu^2 + sigma_eta^2`.
//! Because the dispersion recursion is an affine contraction with factor
//! `(1 - alpha)^2 < 1`, it has the unique fixed point
//! `v* = (alpha^2 sigma_nu^2 + sigma_eta^2) / (2 alpha - alpha^2)`,
//! which [`steady_state_variance`] evaluates in closed form. Shutting off
//! behavioral noise gives the equilibrium benchmark
//! `v*_eq = alpha^2 sigma_nu^2 / (2 alpha - alpha^2)`.

use crate::csv::fmt_f64;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Stationary moments of the economy.
///
/// `v_star` and `v_eq` describe cross-sectional dispersion; the remaining
/// fields are second moments of the joint (fundamental, mean-belief) process
/// needed to price aggregate misallocation. `var_gap` is the stationary
/// variance of the aggregate gap `m - theta`, i.e. the expected squared
/// distance between the average action and the fundamental.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Stationary belief dispersion.
    pub v_star: f64,
    /// Benchmark dispersion with behavioral noise shut off.
    pub v_eq: f64,
    /// Stationary variance of the fundamental.
    pub var_theta: f64,
    /// Stationary variance of the aggregate gap `m - theta`.
    pub var_gap: f64,
    /// Stationary covariance of the mean belief and the fundamental.
    pub cov_m_theta: f64,
}

impl SteadyState {
    /// Stationary variance of the mean belief, recovered from the identity
    /// `var_gap = var_m + var_theta - 2 cov_m_theta`.
    pub fn var_mean_belief(&self) -> f64 {
        self.var_gap - self.var_theta + 2.0 * self.cov_m_theta
    }

    pub const CSV_HEADER: &'static str = "v_star,v_eq,var_theta,var_gap,cov_m_theta";

    /// Single CSV data row matching [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_f64(self.v_star),
            fmt_f64(self.v_eq),
            fmt_f64(self.var_theta),
            fmt_f64(self.var_gap),
            fmt_f64(self.cov_m_theta)
        )
    }
}

/// One step of the mean-belief recursion: `(1 - alpha) m + alpha theta`.
pub fn recurse_mean(m: f64, theta: f64, p: &ModelParams) -> f64 {
    (1.0 - p.alpha) * m + p.alpha * theta
}

/// One step of the dispersion recursion:
/// `(1 - alpha)^2 v + alpha^2 sigma_nu^2 + sigma_eta^2`.
pub fn recurse_variance(v: f64, p: &ModelParams) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("v must be >= 0, got {v}")));
    }
    let decay = (1.0 - p.alpha).powi(2);
    Ok(decay * v + p.alpha.powi(2) * p.sigma_nu.powi(2) + p.sigma_eta.powi(2))
}

/// Closed-form fixed point of the dispersion recursion.
///
/// Requires validated parameters: alpha strictly inside (0, 2) keeps the
/// denominator `2 alpha - alpha^2` positive.
pub fn steady_state_variance(p: &ModelParams) -> f64 {
    let denom = 2.0 * p.alpha - p.alpha.powi(2);
    debug_assert!(denom > 0.0, "alpha outside (0, 2)");
    (p.alpha.powi(2) * p.sigma_nu.powi(2) + p.sigma_eta.powi(2)) / denom
}

/// Benchmark dispersion with behavioral noise forced to zero.
pub fn equilibrium_variance(p: &ModelParams) -> f64 {
    let benchmark = ModelParams {
        sigma_eta: 0.0,
        ..*p
    };
    steady_state_variance(&benchmark)
}

/// Stationary second moments of the joint linear system
/// `theta' = rho theta + eps`, `m' = alpha theta + (1 - alpha) m`.
///
/// The 2x2 discrete-time stationarity equation `Sigma = A Sigma A^T + Q`
/// with `A = [[rho, 0], [alpha, 1 - alpha]]` and `Q = diag(sigma_eps^2, 0)`
/// collapses to three scalar equations, solved here in closed form:
///
/// - `var_theta = sigma_eps^2 / (1 - rho^2)`
/// - `cov_m_theta = alpha rho var_theta / (1 - (1 - alpha) rho)`
/// - `var_m = (alpha^2 var_theta + 2 alpha (1 - alpha) cov_m_theta) / (2 alpha - alpha^2)`
///
/// All denominators are positive for validated parameters (spectral radius
/// below one).
pub fn stationary_joint_moments(p: &ModelParams) -> SteadyState {
    let one_minus_alpha = 1.0 - p.alpha;
    let var_theta = p.sigma_eps.powi(2) / (1.0 - p.rho.powi(2));
    let cov_m_theta = p.alpha * p.rho * var_theta / (1.0 - one_minus_alpha * p.rho);
    let var_m = (p.alpha.powi(2) * var_theta + 2.0 * p.alpha * one_minus_alpha * cov_m_theta)
        / (2.0 * p.alpha - p.alpha.powi(2));
    SteadyState {
        v_star: steady_state_variance(p),
        v_eq: equilibrium_variance(p),
        var_theta,
        var_gap: var_m + var_theta - 2.0 * cov_m_theta,
        cov_m_theta,
    }
}

/// Iterates the dispersion recursion from `v0` until successive values are
/// within `tol`, returning the limit and the number of steps taken.
///
/// This is the constructive counterpart of the closed form: the contraction
/// factor `(1 - alpha)^2` guarantees termination well inside `max_steps`.
pub fn iterate_variance_to_fixed_point(
    v0: f64,
    p: &ModelParams,
    tol: f64,
    max_steps: usize,
) -> Result<(f64, usize)> {
    let mut v = v0;
    for step in 0..max_steps {
        let next = recurse_variance(v, p)?;
        if (next - v).abs() <= tol {
            return Ok((next, step + 1));
        }
        v = next;
    }
    Err(Error::NotConverged(format!(
        "dispersion iteration still moving after {max_steps} steps (v = {v})"
    )))
}
