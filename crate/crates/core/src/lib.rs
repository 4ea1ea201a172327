//! Belief dispersion in a panel of adaptive learners.
//!
//! A continuum of agents tracks a latent AR(1) fundamental through noisy
//! private signals, updating with constant gain plus idiosyncratic
//! experimentation noise. This crate provides the closed-form moment
//! recursions and their stationary solutions, a deterministic Monte Carlo
//! panel, welfare accounting with a pluggable exploration benefit, and the
//! experiment drivers (ergodicity checks, regime comparisons, parameter
//! sweeps) behind the command line tool.
//!
//! All randomness is counter-based: draws are pure functions of
//! (master seed, stream, period, agent, channel), so every result is
//! bit-for-bit reproducible regardless of thread count.

// Negated comparisons like `!(x >= 0.0)` are load-bearing: they treat NaN as
// out of domain, which `x < 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csv;
pub mod error;
pub mod experiments;
pub mod moments;
pub mod panel;
pub mod params;
pub mod rng;
pub mod welfare;

pub use error::{Error, Result};
pub use experiments::{
    dominance_table, mc_error_budget, run_sweep, test_ergodicity, test_ergodicity_with,
    DominanceTable, ErgodicityReport, SweepRow, SweepSpec,
};
pub use moments::{
    equilibrium_variance, iterate_variance_to_fixed_point, recurse_mean, recurse_variance,
    stationary_joint_moments, steady_state_variance, SteadyState,
};
pub use panel::{run_panel, InitSpec, PanelSnapshot, PanelState, ShockStreams};
pub use params::{ModelParams, MomentState};
pub use rng::SeedSpec;
pub use welfare::{
    compare_regimes, implied_noise, omega_deriv, omega_value, optimal_dispersion, tradeoff_curve,
    welfare, welfare_curve, OmegaSpec, RegimeComparison, TradeoffSpec, WelfareReport,
};
