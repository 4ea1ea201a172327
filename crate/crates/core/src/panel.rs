//! Panel simulation: a cross-section of agents tracking one latent fundamental.
//!
//! Every random draw is addressed by (key, period, agent, channel), so results
//! are bit-identical across runs and across thread-pool sizes. Cross-sectional
//! reductions are chunked with a fixed chunk size and combined in chunk order
//! for the same reason.

use rayon::prelude::*;

use crate::csv::fmt_f64;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{self, Channel, SeedSpec, Stream};

/// Fixed reduction/parallelism granularity. Changing this changes output bits.
const CHUNK: usize = 4096;

/// Initial cross-section: beliefs ~ N(belief_mean, belief_std^2), fundamental at theta0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpec {
    pub belief_mean: f64,
    pub belief_std: f64,
    pub theta0: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self { belief_mean: 0.0, belief_std: 0.0, theta0: 0.0 }
    }
}

/// Root keys for the two shock sources. Two panels sharing `fundamental_key`
/// but not `idiosyncratic_key` see the same theta path with independent
/// signal/update noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShockStreams {
    pub fundamental_key: u64,
    pub idiosyncratic_key: u64,
}

impl ShockStreams {
    pub fn from_seed(seed: &SeedSpec) -> Self {
        let key = seed.key();
        Self {
            fundamental_key: rng::derive_key(key, 1),
            idiosyncratic_key: rng::derive_key(key, 2),
        }
    }
}

/// Cross-sectional statistics of a panel at one instant, taken before that
/// period's updates. `mean_payoff` is minus the mean squared distance of
/// beliefs from the fundamental.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelSnapshot {
    pub time: u64,
    pub theta: f64,
    pub mean_belief: f64,
    pub var_belief: f64,
    pub mean_payoff: f64,
}

pub const SNAPSHOT_CSV_HEADER: &str = "time,theta,mean_belief,var_belief,mean_payoff";

impl PanelSnapshot {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.time,
            fmt_f64(self.theta),
            fmt_f64(self.mean_belief),
            fmt_f64(self.var_belief),
            fmt_f64(self.mean_payoff),
        )
    }
}

/// Write snapshots as CSV, header included.
pub fn write_snapshot_csv<W: std::io::Write + ?Sized>(rows: &[PanelSnapshot], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{SNAPSHOT_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.to_csv_row())?;
    }
    Ok(())
}

/// One step of the latent fundamental.
#[inline]
pub fn step_fundamental(theta: f64, p: &ModelParams, stream: &mut Stream) -> f64 {
    p.rho * theta + rng::gaussian_draw(stream, 0.0, p.sigma_eps)
}

/// The simulated cross-section.
#[derive(Debug, Clone)]
pub struct PanelState {
    beliefs: Vec<f64>,
    theta: f64,
    time: u64,
    streams: ShockStreams,
}

impl PanelState {
    /// Draw the initial cross-section. Initial beliefs consume the `Init`
    /// channel at period 0.
    pub fn new(n_agents: usize, init: &InitSpec, streams: ShockStreams) -> Result<Self> {
        if n_agents < 2 {
            return Err(Error::Config(format!(
                "n_agents must be at least 2 to define a cross-sectional variance, got {n_agents}"
            )));
        }
        if !(init.belief_std >= 0.0) {
            return Err(Error::Config(format!(
                "belief_std must be nonnegative, got {}",
                init.belief_std
            )));
        }
        let pk = rng::period_key(streams.idiosyncratic_key, 0);
        let beliefs = (0..n_agents)
            .map(|i| {
                let mut s = rng::agent_stream(pk, i as u64, Channel::Init);
                rng::gaussian_draw(&mut s, init.belief_mean, init.belief_std)
            })
            .collect();
        Ok(Self { beliefs, theta: init.theta0, time: 0, streams })
    }

    pub fn n_agents(&self) -> usize {
        self.beliefs.len()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    /// Advance one period: each agent observes a private signal about the
    /// current fundamental and updates, then the fundamental itself moves.
    pub fn step(&mut self, p: &ModelParams) {
        let pk = rng::period_key(self.streams.idiosyncratic_key, self.time);
        let theta = self.theta;
        self.beliefs
            .par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                update_chunk(chunk, (ci * CHUNK) as u64, pk, theta, p);
            });
        self.advance_fundamental(p);
    }

    /// Snapshot the current cross-section, then advance one period. The
    /// statistics pass is fused with the update pass; the numbers are
    /// bit-identical to calling `snapshot` then `step`.
    pub fn step_recording(&mut self, p: &ModelParams) -> PanelSnapshot {
        let n = self.beliefs.len() as f64;
        let mean = combine(
            self.beliefs
                .par_chunks(CHUNK)
                .map(sum_chunk)
                .collect(),
        ) / n;
        let pk = rng::period_key(self.streams.idiosyncratic_key, self.time);
        let theta = self.theta;
        let partials: Vec<(f64, f64)> = self
            .beliefs
            .par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(ci, chunk)| {
                let moments = moment_chunk(chunk, mean, theta);
                update_chunk(chunk, (ci * CHUNK) as u64, pk, theta, p);
                moments
            })
            .collect();
        let (dev2, err2) = combine2(partials);
        let snap = PanelSnapshot {
            time: self.time,
            theta,
            mean_belief: mean,
            var_belief: dev2 / n,
            mean_payoff: -(err2 / n),
        };
        self.advance_fundamental(p);
        snap
    }

    /// Cross-sectional statistics of the current state, no time advance.
    pub fn snapshot(&self) -> PanelSnapshot {
        let n = self.beliefs.len() as f64;
        let mean = combine(
            self.beliefs
                .par_chunks(CHUNK)
                .map(sum_chunk)
                .collect(),
        ) / n;
        let theta = self.theta;
        let (dev2, err2) = combine2(
            self.beliefs
                .par_chunks(CHUNK)
                .map(|chunk| moment_chunk(chunk, mean, theta))
                .collect(),
        );
        PanelSnapshot {
            time: self.time,
            theta,
            mean_belief: mean,
            var_belief: dev2 / n,
            mean_payoff: -(err2 / n),
        }
    }

    fn advance_fundamental(&mut self, p: &ModelParams) {
        let pk = rng::period_key(self.streams.fundamental_key, self.time);
        let mut stream = rng::agent_stream(pk, 0, Channel::Fundamental);
        self.theta = step_fundamental(self.theta, p, &mut stream);
        self.time += 1;
    }
}

/// Per-chunk belief update. `base_agent` is the global index of `chunk[0]`.
#[inline]
fn update_chunk(chunk: &mut [f64], base_agent: u64, period_key: u64, theta: f64, p: &ModelParams) {
    let keep = 1.0 - p.alpha;
    for (j, b) in chunk.iter_mut().enumerate() {
        let base = rng::agent_base(period_key, base_agent + j as u64);
        let mut sig = rng::channel_stream(base, Channel::Signal);
        let signal = rng::gaussian_draw(&mut sig, theta, p.sigma_nu);
        let mut upd = rng::channel_stream(base, Channel::Update);
        let shock = rng::gaussian_draw(&mut upd, 0.0, p.sigma_eta);
        *b = keep * *b + p.alpha * signal + shock;
    }
}

#[inline]
fn sum_chunk(chunk: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &b in chunk {
        acc += b;
    }
    acc
}

/// Sums of squared deviations from `mean` and squared errors from `theta`.
#[inline]
fn moment_chunk(chunk: &[f64], mean: f64, theta: f64) -> (f64, f64) {
    let mut dev2 = 0.0;
    let mut err2 = 0.0;
    for &b in chunk {
        let d = b - mean;
        dev2 += d * d;
        let e = b - theta;
        err2 += e * e;
    }
    (dev2, err2)
}

fn combine(partials: Vec<f64>) -> f64 {
    let mut acc = 0.0;
    for x in partials {
        acc += x;
    }
    acc
}

fn combine2(partials: Vec<(f64, f64)>) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for (x, y) in partials {
        a += x;
        b += y;
    }
    (a, b)
}

/// Simulate a panel and return one snapshot per post-burn-in period.
///
/// Snapshot at time t describes beliefs formed through period t-1, evaluated
/// against theta_t, before the period-t updates.
pub fn run_panel(
    p: &ModelParams,
    n_agents: usize,
    horizon: u64,
    burn_in: u64,
    seed: &SeedSpec,
    init: &InitSpec,
) -> Result<Vec<PanelSnapshot>> {
    let p = p.validate()?;
    if horizon <= burn_in {
        return Err(Error::Config(format!(
            "horizon ({horizon}) must exceed burn_in ({burn_in})"
        )));
    }
    let mut state = PanelState::new(n_agents, init, ShockStreams::from_seed(seed))?;
    let mut out = Vec::with_capacity((horizon - burn_in) as usize);
    for _ in 0..burn_in {
        state.step(&p);
    }
    for _ in burn_in..horizon {
        out.push(state.step_recording(&p));
    }
    Ok(out)
}
