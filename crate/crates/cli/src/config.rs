use std::fs;
use std::path::PathBuf;

use clap::Args;
use dnls_core::{ConeGuard, IndexScheme, Potential, SolverConfig};
use serde_json::Value;

use crate::commands::CliError;

/// Flags shared by every solving command. Flags override `--config`.
#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Potential, e.g. `quartic`, `saturable-arctan`, `power:eta=1,c=2`.
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Index scheme: onsite or intersite.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Period of the cell.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub tol_step: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// off, monitor or project.
    #[arg(long)]
    pub cone_guard: Option<String>,
    /// Disable the energy backtracking line search.
    #[arg(long)]
    pub no_backtracking: bool,
    #[arg(long)]
    pub ansatz_samples: Option<usize>,
    /// JSON file with SolverConfig fields and optionally `potential`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output prefix; artifacts are written as `<out>.json`, `<out>.profile.csv`, ...
    #[arg(long)]
    pub out: Option<String>,
}

pub struct Resolved {
    pub config: SolverConfig,
    pub potential: Potential,
}

fn parse<T: std::str::FromStr>(raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| CliError::usage(e.to_string()))
}

impl SolverArgs {
    /// Merges the config file (if any) with the flags and validates.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let (mut cfg, mut potential) = match &self.config {
            Some(path) => read_config_file(path)?,
            None => (SolverConfig::default(), None),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = &self.scheme {
            cfg.scheme = parse::<IndexScheme>(v)?;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.tol_residual {
            cfg.tol_residual = v;
        }
        if let Some(v) = self.tol_step {
            cfg.tol_step = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = &self.cone_guard {
            cfg.cone_guard = parse::<ConeGuard>(v)?;
        }
        if self.no_backtracking {
            cfg.backtracking = false;
        }
        if let Some(v) = self.ansatz_samples {
            cfg.ansatz_samples = v;
        }
        if let Some(v) = &self.potential {
            potential = Some(parse::<Potential>(v)?);
        }
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let potential = potential.ok_or_else(|| CliError::usage("no potential given (use --potential)"))?;
        Ok(Resolved { config: cfg, potential })
    }

    pub fn out_prefix(&self, default: &str) -> String {
        self.out.clone().unwrap_or_else(|| default.to_string())
    }
}

fn read_config_file(path: &PathBuf) -> Result<(SolverConfig, Option<Potential>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let object =
        value.as_object_mut().ok_or_else(|| CliError::usage(format!("{}: expected a JSON object", path.display())))?;
    let potential = match object.remove("potential") {
        None => None,
        Some(Value::String(s)) => Some(parse::<Potential>(&s)?),
        Some(other) => return Err(CliError::usage(format!("potential must be a string, got {other}"))),
    };
    let cfg: SolverConfig =
        serde_json::from_value(value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok((cfg, potential))
}
