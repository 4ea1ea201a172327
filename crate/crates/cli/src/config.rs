//! TOML run configuration. Parsing is strict: unknown keys anywhere are
//! rejected so a typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use dispersion::experiments::SweepSpec;
use dispersion::welfare::OmegaSpec;
use dispersion::{Error, ModelParams, Result};
use serde::Deserialize;

pub const DEFAULT_N_AGENTS: usize = 10_000;
pub const DEFAULT_HORIZON: u64 = 5_000;
pub const DEFAULT_BURN_IN: u64 = 1_000;
pub const DEFAULT_MASTER_SEED: u64 = 42;

/// Top-level config file. Only `[model]` is required; every other section has
/// documented defaults (n_agents 10000, horizon 5000, burn_in 1000,
/// master_seed 42, omega sqrt with scale 1, output to stdout as CSV).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub omega: Option<OmegaConfig>,
    pub simulation: Option<SimulationConfig>,
    pub seed: Option<SeedConfig>,
    pub output: Option<OutputConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    pub family: String,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_agents: Option<usize>,
    pub horizon: Option<u64>,
    pub burn_in: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub master_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

/// Grid section for the sweep command. A missing grid falls back to the
/// single value in `[model]`, so only the swept parameters need listing.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub rho: Option<Vec<f64>>,
    pub sigma_eps: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub sigma_nu: Option<Vec<f64>>,
    pub sigma_eta: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub replications: Option<u32>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| {
            Error::Config(format!("invalid config {}: {e}", path.display()))
        })?;
        if let Some(output) = &config.output {
            if let Some(format) = &output.format {
                if format != "csv" {
                    return Err(Error::Config(format!(
                        "output.format must be \"csv\", got \"{format}\""
                    )));
                }
            }
        }
        Ok(config)
    }

    pub fn omega_spec(&self) -> Result<OmegaSpec> {
        let Some(omega) = &self.omega else {
            return OmegaSpec::sqrt(1.0);
        };
        let scale = omega.scale.unwrap_or(1.0);
        match omega.family.as_str() {
            "power" => {
                let exponent = omega.exponent.ok_or_else(|| {
                    Error::Config("omega.exponent is required for the power family".into())
                })?;
                OmegaSpec::power(scale, exponent)
            }
            family => {
                if omega.exponent.is_some() {
                    return Err(Error::Config(format!(
                        "omega.exponent only applies to the power family, not \"{family}\""
                    )));
                }
                match family {
                    "linear" => OmegaSpec::linear(scale),
                    "sqrt" => OmegaSpec::sqrt(scale),
                    "log1p" => OmegaSpec::log1p(scale),
                    other => Err(Error::Config(format!(
                        "omega.family must be one of linear, sqrt, log1p, power; got \"{other}\""
                    ))),
                }
            }
        }
    }

    pub fn n_agents(&self) -> usize {
        self.simulation
            .as_ref()
            .and_then(|s| s.n_agents)
            .unwrap_or(DEFAULT_N_AGENTS)
    }

    pub fn horizon(&self) -> u64 {
        self.simulation
            .as_ref()
            .and_then(|s| s.horizon)
            .unwrap_or(DEFAULT_HORIZON)
    }

    pub fn burn_in(&self) -> u64 {
        self.simulation
            .as_ref()
            .and_then(|s| s.burn_in)
            .unwrap_or(DEFAULT_BURN_IN)
    }

    /// Flag wins over file, file over default.
    pub fn master_seed(&self, flag: Option<u64>) -> u64 {
        flag.or_else(|| self.seed.as_ref().and_then(|s| s.master_seed))
            .unwrap_or(DEFAULT_MASTER_SEED)
    }

    /// Flag wins over file; `None` means stdout.
    pub fn output_path(&self, flag: Option<&Path>) -> Option<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output.as_ref().and_then(|o| o.path.clone()))
    }

    /// Assemble the sweep spec, defaulting absent grids to the `[model]`
    /// value so the sweep degenerates gracefully to a single cell.
    pub fn sweep_spec(&self, master_seed: u64) -> Result<SweepSpec> {
        let sweep = self.sweep.as_ref().ok_or_else(|| {
            Error::Config("the sweep command requires a [sweep] section".into())
        })?;
        let grid = |g: &Option<Vec<f64>>, fallback: f64| -> Vec<f64> {
            g.clone().unwrap_or_else(|| vec![fallback])
        };
        Ok(SweepSpec {
            rho: grid(&sweep.rho, self.model.rho),
            sigma_eps: grid(&sweep.sigma_eps, self.model.sigma_eps),
            alpha: grid(&sweep.alpha, self.model.alpha),
            sigma_nu: grid(&sweep.sigma_nu, self.model.sigma_nu),
            sigma_eta: grid(&sweep.sigma_eta, self.model.sigma_eta),
            gamma: grid(&sweep.gamma, self.model.gamma),
            omega: self.omega_spec()?,
            n_agents: self.n_agents(),
            horizon: self.horizon(),
            burn_in: self.burn_in(),
            replications: sweep.replications.unwrap_or(1),
            master_seed,
        })
    }
}
