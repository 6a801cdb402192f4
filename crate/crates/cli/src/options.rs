//! Flag definitions and config-file merging.
//!
//! Every tunable can come from three places, in override order:
//! command-line flag > `--config` file key > built-in default. Config files
//! use the same flat `key = value` text as scene files; keys mirror the flag
//! names with underscores (`rho_tv = 0.02`). Unknown keys in a config file
//! are rejected, so typos fail loudly instead of silently running defaults.

use std::path::PathBuf;

use clap::Args;
use lfrl_core::config::KvMap;
use lfrl_core::{Error, RLConfig, RegConfig, Result, Velocity6};

pub fn parse_velocity(text: &str) -> std::result::Result<Velocity6, String> {
    Velocity6::parse(text).map_err(|e| e.to_string())
}

fn parse_d_tensor_text(text: &str) -> Result<[f64; 4]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::config(format!(
            "d-tensor needs 4 comma-separated entries, got {}",
            parts.len()
        )));
    }
    let mut d = [0.0f64; 4];
    for (slot, part) in d.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::config(format!("invalid d-tensor entry '{part}'")))?;
    }
    Ok(d)
}

pub fn parse_d_tensor(text: &str) -> std::result::Result<[f64; 4], String> {
    parse_d_tensor_text(text).map_err(|e| e.to_string())
}

/// Flags shared by every subcommand that runs the RL loop or touches
/// randomness. Fields left `None` fall through to the config file, then to
/// the library defaults.
#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Flat key = value settings file; flags given on the command line win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Camera velocity over the exposure: "tx,ty,tz,rx,ry,rz"
    /// (lengths and radians per exposure unit).
    #[arg(long, value_parser = parse_velocity)]
    pub velocity: Option<Velocity6>,

    /// Trajectory poses used by forward and reverse blur.
    #[arg(long, value_name = "N")]
    pub n_steps: Option<usize>,

    /// Richardson-Lucy iterations.
    #[arg(long, value_name = "COUNT")]
    pub iterations: Option<usize>,

    /// Total-variation regularizer weight.
    #[arg(long, value_name = "RHO")]
    pub rho_tv: Option<f64>,

    /// Parallax-consistency regularizer weight.
    #[arg(long, value_name = "RHO")]
    pub rho_ep: Option<f64>,

    /// Anisotropy diagonal for the TV term: "a_s,a_t,a_u,a_v".
    #[arg(long, value_parser = parse_d_tensor, value_name = "A,B,C,D")]
    pub d_tensor: Option<[f64; 4]>,

    /// Smoothing epsilon inside both regularizer square roots.
    #[arg(long, value_name = "EPS")]
    pub eps: Option<f64>,

    /// Expected photon count at intensity 1 for Poisson noise injection.
    #[arg(long, value_name = "PEAK")]
    pub photon_peak: Option<f64>,

    /// Seed for all randomness in the command.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Drop this many view rows/columns from each side of the camera grid
    /// before further processing.
    #[arg(long, value_name = "K")]
    pub crop_border: Option<usize>,

    /// Disable both regularizers (overrides rho flags and config).
    #[arg(long)]
    pub no_reg: bool,
}

/// `CommonOpts` resolved against the config file and defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub velocity: Option<Velocity6>,
    pub rl: RLConfig,
    pub reg: RegConfig,
    pub photon_peak: Option<f64>,
    pub seed: u64,
    pub crop_border: usize,
}

impl CommonOpts {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => Some(KvMap::parse(&std::fs::read_to_string(path)?)?),
            None => None,
        };
        let kv = file.as_ref();

        let velocity = match (self.velocity, kv.and_then(|m| m.raw("velocity"))) {
            (Some(v), _) => Some(v),
            (None, Some(text)) => Some(Velocity6::parse(text)?),
            (None, None) => None,
        };
        let d_tensor = match (self.d_tensor, kv.and_then(|m| m.raw("d_tensor"))) {
            (Some(d), _) => Some(d),
            (None, Some(text)) => Some(parse_d_tensor_text(text)?),
            (None, None) => None,
        };

        let rl_defaults = RLConfig::default();
        let rl = RLConfig {
            iterations: pick(self.iterations, kv, "iterations", KvMap::usize)?
                .unwrap_or(rl_defaults.iterations),
            n_steps: pick(self.n_steps, kv, "n_steps", KvMap::usize)?
                .unwrap_or(rl_defaults.n_steps),
            ..rl_defaults
        };

        let reg_defaults = RegConfig::default();
        let mut reg = RegConfig {
            rho_tv: pick(self.rho_tv, kv, "rho_tv", KvMap::f64)?.unwrap_or(reg_defaults.rho_tv),
            rho_ep: pick(self.rho_ep, kv, "rho_ep", KvMap::f64)?.unwrap_or(reg_defaults.rho_ep),
            d_tensor: d_tensor.unwrap_or(reg_defaults.d_tensor),
            eps: pick(self.eps, kv, "eps", KvMap::f64)?.unwrap_or(reg_defaults.eps),
        };
        let no_reg = self.no_reg
            || kv
                .map(|m| matches!(m.raw("no_reg"), Some("true") | Some("1")))
                .unwrap_or(false);
        if no_reg {
            reg = RegConfig { rho_tv: 0.0, rho_ep: 0.0, ..reg };
        }

        let run = RunConfig {
            velocity,
            rl,
            reg,
            photon_peak: pick(self.photon_peak, kv, "photon_peak", KvMap::f64)?,
            seed: pick(self.seed, kv, "seed", KvMap::u64)?.unwrap_or(0),
            crop_border: pick(self.crop_border, kv, "crop_border", KvMap::usize)?.unwrap_or(0),
        };
        if let Some(m) = kv {
            m.finish()?;
        }
        run.rl.validate()?;
        run.reg.validate()?;
        Ok(run)
    }
}

/// Flag value if present, else the config-file key through `accessor`.
fn pick<T>(
    flag: Option<T>,
    kv: Option<&KvMap>,
    key: &str,
    accessor: impl Fn(&KvMap, &str) -> Result<Option<T>>,
) -> Result<Option<T>> {
    if flag.is_some() {
        // Mark the key consumed so a config file may carry it alongside an
        // overriding flag without tripping the stray-key check.
        if let Some(m) = kv {
            let _ = m.raw(key);
        }
        return Ok(flag);
    }
    match kv {
        Some(m) => accessor(m, key),
        None => Ok(None),
    }
}
