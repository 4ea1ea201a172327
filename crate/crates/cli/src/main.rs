//! Command line front end: analytical moments, panel simulation, welfare
//! curves and optima, regime comparison, and parameter sweeps, all emitting
//! reproducible CSV.
//!
//! Exit codes: 0 success, 2 configuration or validation problems,
//! 3 mathematical infeasibility (no interior optimum, unreachable target,
//! non-convergence).

// Negated comparisons like `!(x >= 0.0)` are load-bearing: they treat NaN as
// out of domain, which `x < 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dispersion::experiments::{self, SweepRow};
use dispersion::moments::SteadyState;
use dispersion::panel::{self, InitSpec};
use dispersion::welfare::{self, TradeoffSpec};
use dispersion::{Error, Result, SeedSpec};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "dispersion",
    version,
    about = "Belief dispersion in a panel of adaptive learners: moments, simulation, welfare"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form stationary moments for the configured parameters
    SteadyState(CommonArgs),
    /// Simulate the panel and emit post-burn-in snapshot rows
    Simulate(SimulateArgs),
    /// Welfare decomposition along a uniform dispersion grid
    Welfare(WelfareArgs),
    /// Interior welfare optimum and the noise level that implements it
    Optimize(CommonArgs),
    /// Regime welfare across a grid of experimentation-noise levels
    Compare(CompareArgs),
    /// Monte Carlo sweep over parameter grids from the [sweep] section
    Sweep(SweepArgs),
    /// Stylized exploration/misallocation tradeoff curve on [0, 2]
    Tradeoff(TradeoffArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; [model] is required
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Write CSV here instead of stdout (overrides output.path)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Master seed (overrides seed.master_seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; never changes output bytes
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct WelfareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lower end of the dispersion grid
    #[arg(long, default_value_t = 0.0)]
    v_min: f64,
    /// Upper end of the dispersion grid
    #[arg(long, default_value_t = 4.0)]
    v_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated sigma_eta values
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,0.5,1.0")]
    sigma_eta_grid: Vec<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Master seed (overrides seed.master_seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; never changes output bytes
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Write CSV here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Number of grid points on [0, 2]
    #[arg(long, default_value_t = 201)]
    points: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.cmd) {
        eprintln!("{e}");
        let code = match e {
            Error::Domain(_) | Error::Config(_) => 2,
            Error::Infeasible(_)
            | Error::NoInteriorOptimum(_)
            | Error::NonConcave(_)
            | Error::NotConverged(_) => 3,
        };
        std::process::exit(code);
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::SteadyState(args) => cmd_steady_state(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Welfare(args) => cmd_welfare(args),
        Cmd::Optimize(args) => cmd_optimize(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Tradeoff(args) => cmd_tradeoff(args),
    }
}

/// Render CSV into the chosen sink. Returns the path actually written, if any.
fn emit(
    config: Option<&RunConfig>,
    flag: Option<&PathBuf>,
    render: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let path = match config {
        Some(c) => c.output_path(flag.map(|p| p.as_path())),
        None => flag.cloned(),
    };
    match path {
        Some(path) => {
            let mut file = std::fs::File::create(&path).map_err(|e| {
                Error::Config(format!("cannot create output {}: {e}", path.display()))
            })?;
            render(&mut file)
                .and_then(|()| file.flush())
                .map_err(|e| Error::Config(format!("cannot write output {}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock)
                .and_then(|()| lock.flush())
                .map_err(|e| Error::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Run `f` inside a dedicated rayon pool when a worker count is given.
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build a pool of {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn cmd_steady_state(args: CommonArgs) -> Result<()> {
    let config = RunConfig::load(&args.config)?;
    let p = config.model.validate()?;
    let ss = dispersion::stationary_joint_moments(&p);
    emit(Some(&config), args.output.as_ref(), |w| {
        writeln!(w, "{}", SteadyState::CSV_HEADER)?;
        writeln!(w, "{}", ss.to_csv_row())
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = RunConfig::load(&args.common.config)?;
    let p = config.model.validate()?;
    let master_seed = config.master_seed(args.seed);
    eprintln!("master_seed = {master_seed}");
    let seed = SeedSpec { master_seed, stream_id: 0 };
    let snaps = with_workers(args.workers, || {
        dispersion::run_panel(
            &p,
            config.n_agents(),
            config.horizon(),
            config.burn_in(),
            &seed,
            &InitSpec::default(),
        )
    })??;
    let avg = snaps.iter().map(|s| s.var_belief).sum::<f64>() / snaps.len() as f64;
    let v_star = dispersion::steady_state_variance(&p);
    let deviation = if v_star > 0.0 {
        (avg - v_star).abs() / v_star
    } else {
        avg.abs()
    };
    eprintln!(
        "time-averaged var_belief = {avg:.6e}, analytic v* = {v_star:.6e}, relative deviation = {:.3}%",
        deviation * 100.0
    );
    emit(Some(&config), args.common.output.as_ref(), |w| {
        panel::write_snapshot_csv(&snaps, w)
    })
}

fn cmd_welfare(args: WelfareArgs) -> Result<()> {
    let config = RunConfig::load(&args.common.config)?;
    let p = config.model.validate()?;
    let omega = config.omega_spec()?;
    if !(args.v_min >= 0.0) || !(args.v_max > args.v_min) {
        return Err(Error::Config(format!(
            "need 0 <= v-min < v-max, got v-min {} and v-max {}",
            args.v_min, args.v_max
        )));
    }
    if args.points < 2 {
        return Err(Error::Config(format!(
            "points must be at least 2, got {}",
            args.points
        )));
    }
    let step = (args.v_max - args.v_min) / (args.points - 1) as f64;
    let grid: Vec<f64> = (0..args.points)
        .map(|i| args.v_min + step * i as f64)
        .collect();
    let rows = welfare::welfare_curve(&omega, &p, &grid)?;
    let optimum = match welfare::optimal_dispersion(&omega, p.gamma) {
        Ok(pair) => Some(pair),
        Err(Error::NoInteriorOptimum(msg)) => {
            eprintln!("no interior optimum: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    emit(Some(&config), args.common.output.as_ref(), |w| {
        welfare::write_welfare_csv(&rows, w)?;
        if let Some((v_opt, w_opt)) = optimum {
            writeln!(
                w,
                "# v_opt={},W_opt={}",
                dispersion::csv::fmt_f64(v_opt),
                dispersion::csv::fmt_f64(w_opt)
            )?;
        }
        Ok(())
    })
}

fn cmd_optimize(args: CommonArgs) -> Result<()> {
    let config = RunConfig::load(&args.config)?;
    let p = config.model.validate()?;
    let omega = config.omega_spec()?;
    let (v_opt, w_opt) = welfare::optimal_dispersion(&omega, p.gamma)?;
    let floor = dispersion::equilibrium_variance(&p);
    if v_opt < floor {
        return Err(Error::Infeasible(format!(
            "optimal dispersion {v_opt:.6e} is below the signal-noise floor {floor:.6e}; \
no nonnegative sigma_eta implements it"
        )));
    }
    let sigma_eta_star = welfare::implied_noise(v_opt, &p)?;
    emit(Some(&config), args.output.as_ref(), |w| {
        writeln!(w, "v_opt,W_opt,sigma_eta_star")?;
        writeln!(
            w,
            "{},{},{}",
            dispersion::csv::fmt_f64(v_opt),
            dispersion::csv::fmt_f64(w_opt),
            dispersion::csv::fmt_f64(sigma_eta_star)
        )
    })
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let config = RunConfig::load(&args.common.config)?;
    let p = config.model.validate()?;
    let omega = config.omega_spec()?;
    let table = experiments::dominance_table(&omega, &p, &args.sigma_eta_grid)?;
    emit(Some(&config), args.common.output.as_ref(), |w| {
        experiments::write_dominance_csv(&table, w)
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let config = RunConfig::load(&args.common.config)?;
    config.model.validate()?;
    let master_seed = config.master_seed(args.seed);
    eprintln!("master_seed = {master_seed}");
    let spec = config.sweep_spec(master_seed)?;
    let cells = spec.rho.len()
        * spec.sigma_eps.len()
        * spec.alpha.len()
        * spec.sigma_nu.len()
        * spec.sigma_eta.len()
        * spec.gamma.len();
    eprintln!(
        "sweep: {cells} cells x {} replications = {} rows",
        spec.replications,
        cells * spec.replications as usize
    );
    let started = std::time::Instant::now();
    let rows: Vec<SweepRow> = with_workers(args.workers, || experiments::run_sweep(&spec))??;
    eprintln!("sweep: finished in {:.1}s", started.elapsed().as_secs_f64());
    emit(Some(&config), args.common.output.as_ref(), |w| {
        experiments::write_sweep_csv(&rows, w)
    })
}

fn cmd_tradeoff(args: TradeoffArgs) -> Result<()> {
    if args.points < 2 {
        return Err(Error::Config(format!(
            "points must be at least 2, got {}",
            args.points
        )));
    }
    let spec = TradeoffSpec::default();
    let step = 2.0 / (args.points - 1) as f64;
    let grid: Vec<f64> = (0..args.points).map(|i| step * i as f64).collect();
    let curve = welfare::tradeoff_curve(&spec, &grid);
    emit(None, args.output.as_ref(), |w| {
        welfare::write_tradeoff_csv(&curve, w)?;
        writeln!(
            w,
            "# argmax_x={},net_max={}",
            dispersion::csv::fmt_f64(curve.argmax_x),
            dispersion::csv::fmt_f64(curve.net_max)
        )
    })
}
