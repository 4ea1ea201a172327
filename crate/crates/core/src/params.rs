//! Structural model parameters and their validity checks.
//!
//! The economy is parameterized by six scalars: the persistence and
//! innovation volatility of the latent fundamental, the belief adjustment
//! speed, the private-signal and behavioral noise levels, and the weight on
//! the exploration benefit. Every analytical formula downstream assumes the
//! constraints enforced by [`ModelParams::validate`]; in particular the
//! adjustment speed must stay strictly inside (0, 2) so that the dispersion
//! recursion is a contraction with a nonsingular fixed point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural parameters of the model.
///
/// Plain data: construct freely, then call [`validate`](Self::validate)
/// before handing the parameters to the simulation or analytical layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Persistence of the fundamental, |rho| < 1.
    pub rho: f64,
    /// Innovation standard deviation of the fundamental, > 0.
    pub sigma_eps: f64,
    /// Belief adjustment speed, strictly inside (0, 2).
    pub alpha: f64,
    /// Private-signal noise standard deviation, >= 0.
    pub sigma_nu: f64,
    /// Behavioral noise standard deviation, >= 0.
    pub sigma_eta: f64,
    /// Exploration-benefit weight, > 0.
    pub gamma: f64,
}

impl ModelParams {
    /// Returns the parameters unchanged iff every invariant holds.
    ///
    /// Checks, in order: |rho| < 1; alpha in the open interval (0, 2)
    /// (the dispersion fixed point has denominator 2*alpha - alpha^2, which
    /// vanishes at both endpoints); sigma_eps > 0; sigma_nu >= 0;
    /// sigma_eta >= 0; gamma > 0. Idempotent by construction.
    pub fn validate(self) -> Result<Self> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "rho must satisfy |rho| < 1, got {}",
                self.rho
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::Domain(format!(
                "alpha must lie strictly inside (0, 2), got {}",
                self.alpha
            )));
        }
        if !(self.sigma_eps > 0.0) {
            return Err(Error::Domain(format!(
                "sigma_eps must be > 0, got {}",
                self.sigma_eps
            )));
        }
        if !(self.sigma_nu >= 0.0) {
            return Err(Error::Domain(format!(
                "sigma_nu must be >= 0, got {}",
                self.sigma_nu
            )));
        }
        if !(self.sigma_eta >= 0.0) {
            return Err(Error::Domain(format!(
                "sigma_eta must be >= 0, got {}",
                self.sigma_eta
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Domain(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        Ok(self)
    }
}

/// The (fundamental, mean belief, belief dispersion) triple tracked by the
/// analytical layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    /// Current value of the latent fundamental.
    pub theta: f64,
    /// Cross-sectional mean belief.
    pub m: f64,
    /// Cross-sectional belief variance, >= 0.
    pub v: f64,
}

impl MomentState {
    /// Creates a moment state; rejects negative dispersion.
    pub fn new(theta: f64, m: f64, v: f64) -> Result<Self> {
        if !(v >= 0.0) {
            return Err(Error::Domain(format!("v must be >= 0, got {v}")));
        }
        Ok(Self { theta, m, v })
    }

    /// Applies one step of the exact moment recursions, taking the next
    /// fundamental value as given (it is driven by its own shock process).
    pub fn advance(&self, p: &ModelParams, next_theta: f64) -> Self {
        Self {
            theta: next_theta,
            m: crate::moments::recurse_mean(self.m, self.theta, p),
            v: (1.0 - p.alpha).powi(2) * self.v
                + p.alpha.powi(2) * p.sigma_nu.powi(2)
                + p.sigma_eta.powi(2),
        }
    }
}
