//! Experiment drivers: ergodicity diagnostics on twin panels, the dominance
//! table over an experimentation-noise grid, and the parameter sweep engine.

use rayon::prelude::*;

use crate::csv::{fmt_f64, quote_field};
use crate::error::{Error, Result};
use crate::moments;
use crate::panel::{run_panel, InitSpec, PanelState, ShockStreams};
use crate::params::ModelParams;
use crate::rng::{self, SeedSpec};
use crate::welfare::{self, OmegaSpec};

/// Seed used by the default ergodicity diagnostic. The check is a fixed,
/// reproducible experiment; use [`test_ergodicity_with`] to vary it.
const ERGODICITY_SEED: SeedSpec = SeedSpec { master_seed: 42, stream_id: 0 };

/// Outcome of running two panels from different initial conditions on a shared
/// fundamental path. `distance` is the maximum over the mean and variance
/// channels of the absolute difference in post-burn-in time averages;
/// `periods_to_tolerance` is the first period whose instantaneous distance
/// fell within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub init_a: String,
    pub init_b: String,
    pub distance: f64,
    pub converged: bool,
    pub periods_to_tolerance: Option<u64>,
}

fn describe_init(init: &InitSpec) -> String {
    format!(
        "beliefs N({}, {}^2), theta0 = {}",
        init.belief_mean, init.belief_std, init.theta0
    )
}

/// Twin-panel ergodicity check from extreme initial conditions: all beliefs at
/// +10 sqrt(v*) versus all at -10 sqrt(v*), same fundamental shocks,
/// independent idiosyncratic shocks. The first half of the horizon is treated
/// as burn-in. Errors with `NotConverged` when the post-burn-in distance stays
/// above `tol`.
pub fn test_ergodicity(
    p: &ModelParams,
    n_agents: usize,
    horizon: u64,
    tol: f64,
) -> Result<ErgodicityReport> {
    let offset = 10.0 * moments::steady_state_variance(p).sqrt();
    let init_a = InitSpec { belief_mean: offset, belief_std: 0.0, theta0: 0.0 };
    let init_b = InitSpec { belief_mean: -offset, belief_std: 0.0, theta0: 0.0 };
    let report = test_ergodicity_with(
        p,
        n_agents,
        horizon,
        horizon / 2,
        tol,
        &ERGODICITY_SEED,
        &init_a,
        &init_b,
    )?;
    if !report.converged {
        return Err(Error::NotConverged(format!(
            "panels from {} and {} still differ by {:.3e} (tol {tol:.3e}) after {horizon} periods",
            report.init_a, report.init_b, report.distance
        )));
    }
    Ok(report)
}

/// Ergodicity check with explicit burn-in, seed, and initial conditions.
/// Returns the report even when not converged; the plain [`test_ergodicity`]
/// wrapper turns that case into an error.
#[allow(clippy::too_many_arguments)]
pub fn test_ergodicity_with(
    p: &ModelParams,
    n_agents: usize,
    horizon: u64,
    burn_in: u64,
    tol: f64,
    seed: &SeedSpec,
    init_a: &InitSpec,
    init_b: &InitSpec,
) -> Result<ErgodicityReport> {
    let p = p.validate()?;
    if horizon <= burn_in {
        return Err(Error::Config(format!(
            "horizon ({horizon}) must exceed burn_in ({burn_in})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let key = seed.key();
    let fundamental_key = rng::derive_key(key, 1);
    let streams_a = ShockStreams { fundamental_key, idiosyncratic_key: rng::derive_key(key, 10) };
    let streams_b = ShockStreams { fundamental_key, idiosyncratic_key: rng::derive_key(key, 11) };
    let mut panel_a = PanelState::new(n_agents, init_a, streams_a)?;
    let mut panel_b = PanelState::new(n_agents, init_b, streams_b)?;

    let mut periods_to_tolerance = None;
    let (mut sum_ma, mut sum_mb, mut sum_va, mut sum_vb) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..horizon {
        let a = panel_a.step_recording(&p);
        let b = panel_b.step_recording(&p);
        let instant = (a.mean_belief - b.mean_belief)
            .abs()
            .max((a.var_belief - b.var_belief).abs());
        if periods_to_tolerance.is_none() && instant <= tol {
            periods_to_tolerance = Some(t);
        }
        if t >= burn_in {
            sum_ma += a.mean_belief;
            sum_mb += b.mean_belief;
            sum_va += a.var_belief;
            sum_vb += b.var_belief;
        }
    }
    let n_post = (horizon - burn_in) as f64;
    let distance = ((sum_ma - sum_mb) / n_post)
        .abs()
        .max(((sum_va - sum_vb) / n_post).abs());
    Ok(ErgodicityReport {
        init_a: describe_init(init_a),
        init_b: describe_init(init_b),
        distance,
        converged: distance <= tol,
        periods_to_tolerance,
    })
}

/// One row of the welfare dominance scan over experimentation-noise levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceRow {
    pub sigma_eta: f64,
    pub v_star: f64,
    pub w_star: f64,
    pub w_eq: f64,
    pub dominates: bool,
}

/// Welfare at the behavioral steady state versus the no-experimentation
/// benchmark, across a sigma_eta grid. The claim being probed is existential,
/// so `any_dominates` summarizes the table.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceTable {
    pub rows: Vec<DominanceRow>,
    pub any_dominates: bool,
}

pub const DOMINANCE_CSV_HEADER: &str = "sigma_eta,v_star,w_star,w_eq,dominates";

/// Evaluate regime welfare along `sigma_eta_grid`, holding all other params at
/// `p_base`.
pub fn dominance_table(
    spec: &OmegaSpec,
    p_base: &ModelParams,
    sigma_eta_grid: &[f64],
) -> Result<DominanceTable> {
    if sigma_eta_grid.is_empty() {
        return Err(Error::Config("sigma_eta grid is empty".into()));
    }
    let rows = sigma_eta_grid
        .iter()
        .map(|&sigma_eta| {
            let p = ModelParams { sigma_eta, ..*p_base }.validate()?;
            let c = welfare::compare_regimes(spec, &p)?;
            Ok(DominanceRow {
                sigma_eta,
                v_star: c.v_star,
                w_star: c.w_star,
                w_eq: c.w_eq,
                dominates: c.dominates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let any_dominates = rows.iter().any(|r| r.dominates);
    Ok(DominanceTable { rows, any_dominates })
}

pub fn write_dominance_csv<W: std::io::Write + ?Sized>(
    table: &DominanceTable,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "{DOMINANCE_CSV_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.sigma_eta),
            fmt_f64(r.v_star),
            fmt_f64(r.w_star),
            fmt_f64(r.w_eq),
            r.dominates,
        )?;
    }
    Ok(())
}

/// Full factorial sweep over model parameter grids with Monte Carlo
/// replications per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rho: Vec<f64>,
    pub sigma_eps: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma_nu: Vec<f64>,
    pub sigma_eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub omega: OmegaSpec,
    pub n_agents: usize,
    pub horizon: u64,
    pub burn_in: u64,
    pub replications: u32,
    pub master_seed: u64,
}

/// Per-cell results; absent on rows whose parameter combination failed
/// validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub v_star_analytic: f64,
    pub v_eq_analytic: f64,
    pub w_star: f64,
    pub w_eq: f64,
    pub dominates: bool,
    pub mc_var_belief: f64,
    pub mc_rel_err: f64,
}

/// One sweep row: the cell's parameters, the replication index, and either the
/// computed cell or the validation error that sidelined it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub sigma_eps: f64,
    pub alpha: f64,
    pub sigma_nu: f64,
    pub sigma_eta: f64,
    pub gamma: f64,
    pub replication: u32,
    pub result: std::result::Result<SweepCell, String>,
}

pub const SWEEP_CSV_HEADER: &str = "rho,sigma_eps,alpha,sigma_nu,sigma_eta,gamma,replication,\
v_star_analytic,v_eq_analytic,W_star,W_eq,dominates,mc_var_belief,mc_rel_err,error";

/// Five-sigma bound on the relative Monte Carlo error of the time-averaged
/// cross-sectional variance: 5 * sqrt(2 / (N * T_eff)), where T_eff discounts
/// the post-burn-in period count by the lag-1 autocorrelation (1-alpha)^2 of
/// the variance process.
pub fn mc_error_budget(n_agents: usize, post_burn_in_periods: u64, alpha: f64) -> f64 {
    let phi = (1.0 - alpha) * (1.0 - alpha);
    let t_eff = post_burn_in_periods as f64 * (1.0 - phi) / (1.0 + phi);
    5.0 * (2.0 / (n_agents as f64 * t_eff)).sqrt()
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("sweep grid for {name} is empty")));
    }
    Ok(())
}

/// Run the sweep. Rows come back in cell-major, replication-minor order and
/// are a pure function of `SweepSpec`: each replication owns stream
/// `cell_index * replications + replication` of `master_seed`, so results do
/// not depend on worker count or scheduling. Parameter combinations that fail
/// validation produce rows carrying the error instead of aborting the sweep.
pub fn run_sweep(s: &SweepSpec) -> Result<Vec<SweepRow>> {
    check_grid("rho", &s.rho)?;
    check_grid("sigma_eps", &s.sigma_eps)?;
    check_grid("alpha", &s.alpha)?;
    check_grid("sigma_nu", &s.sigma_nu)?;
    check_grid("sigma_eta", &s.sigma_eta)?;
    check_grid("gamma", &s.gamma)?;
    if s.replications < 1 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    if s.horizon <= s.burn_in {
        return Err(Error::Config(format!(
            "horizon ({}) must exceed burn_in ({})",
            s.horizon, s.burn_in
        )));
    }

    let mut jobs = Vec::new();
    let mut cell_index = 0u64;
    for &rho in &s.rho {
        for &sigma_eps in &s.sigma_eps {
            for &alpha in &s.alpha {
                for &sigma_nu in &s.sigma_nu {
                    for &sigma_eta in &s.sigma_eta {
                        for &gamma in &s.gamma {
                            let p = ModelParams { rho, sigma_eps, alpha, sigma_nu, sigma_eta, gamma };
                            for rep in 0..s.replications {
                                let stream_id =
                                    cell_index * s.replications as u64 + rep as u64;
                                jobs.push((p, rep, stream_id));
                            }
                            cell_index += 1;
                        }
                    }
                }
            }
        }
    }

    Ok(jobs
        .into_par_iter()
        .map(|(p, replication, stream_id)| SweepRow {
            rho: p.rho,
            sigma_eps: p.sigma_eps,
            alpha: p.alpha,
            sigma_nu: p.sigma_nu,
            sigma_eta: p.sigma_eta,
            gamma: p.gamma,
            replication,
            result: sweep_cell(s, &p, stream_id).map_err(|e| e.to_string()),
        })
        .collect())
}

fn sweep_cell(s: &SweepSpec, p: &ModelParams, stream_id: u64) -> Result<SweepCell> {
    let p = p.validate()?;
    let c = welfare::compare_regimes(&s.omega, &p)?;
    let seed = SeedSpec { master_seed: s.master_seed, stream_id };
    let snaps = run_panel(&p, s.n_agents, s.horizon, s.burn_in, &seed, &InitSpec::default())?;
    let mc_var_belief = snaps.iter().map(|x| x.var_belief).sum::<f64>() / snaps.len() as f64;
    let mc_rel_err = if c.v_star > 0.0 {
        (mc_var_belief - c.v_star).abs() / c.v_star
    } else {
        mc_var_belief.abs()
    };
    Ok(SweepCell {
        v_star_analytic: c.v_star,
        v_eq_analytic: c.v_eq,
        w_star: c.w_star,
        w_eq: c.w_eq,
        dominates: c.dominates,
        mc_var_belief,
        mc_rel_err,
    })
}

pub fn write_sweep_csv<W: std::io::Write + ?Sized>(rows: &[SweepRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        let head = format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(r.rho),
            fmt_f64(r.sigma_eps),
            fmt_f64(r.alpha),
            fmt_f64(r.sigma_nu),
            fmt_f64(r.sigma_eta),
            fmt_f64(r.gamma),
            r.replication,
        );
        match &r.result {
            Ok(c) => writeln!(
                w,
                "{head},{},{},{},{},{},{},{},",
                fmt_f64(c.v_star_analytic),
                fmt_f64(c.v_eq_analytic),
                fmt_f64(c.w_star),
                fmt_f64(c.w_eq),
                c.dominates,
                fmt_f64(c.mc_var_belief),
                fmt_f64(c.mc_rel_err),
            )?,
            Err(msg) => writeln!(w, "{head},,,,,,,,{}", quote_field(msg))?,
        }
    }
    Ok(())
}
