//! Parameter sweeps over `ρ`, `α` or `N`.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::potentials::Potential;
use crate::solver::{solve, SolverConfig, WaveSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Rho,
    Alpha,
    N,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Rho => "rho",
            SweepParam::Alpha => "alpha",
            SweepParam::N => "N",
        })
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rho" => Ok(SweepParam::Rho),
            "alpha" => Ok(SweepParam::Alpha),
            "N" | "n" => Ok(SweepParam::N),
            _ => Err(Error::Parse(format!("unknown sweep parameter '{s}' (rho|alpha|N)"))),
        }
    }
}

impl SweepParam {
    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SolverConfig, value: f64) -> Result<SolverConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParam::Rho => cfg.rho = value,
            SweepParam::Alpha => cfg.alpha = value,
            SweepParam::N => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::InvalidConfig(format!("N must be an integer, got {value}")));
                }
                cfg.n = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `start, start + step, …` up to `stop` inclusive (with a relative slack
/// of `1e-9` steps), each value rounded to 12 decimals.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::InvalidConfig("grid needs finite bounds and a positive step".into()));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub param: f64,
    pub config: SolverConfig,
    pub outcome: Result<WaveSolution>,
}

impl SweepPoint {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(s) if s.converged)
    }
}

/// Solves at every grid value. Runs execute on the current rayon pool and
/// are returned in grid order.
pub fn sweep(base: &SolverConfig, p: &Potential, param: SweepParam, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    let configs = values.iter().map(|&v| param.apply(base, v)).collect::<Result<Vec<_>>>()?;
    Ok(values
        .par_iter()
        .zip(configs.into_par_iter())
        .map(|(&param, config)| {
            let outcome = solve(&config, p);
            SweepPoint { param, config, outcome }
        })
        .collect())
}

pub const SUMMARY_HEADER: &str = "param,sigma,p_total,t_value,residual,max_u,participation_ratio";

/// Summary CSV; failed points carry `NaN` in every numeric column.
pub fn write_summary_csv<W: Write>(points: &[SweepPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for pt in points {
        let row = match &pt.outcome {
            Ok(s) => [
                s.sigma,
                s.energies.p_total,
                s.energies.t_value.unwrap_or(f64::NAN),
                s.residual,
                s.profile.max_value(),
                s.participation_ratio(),
            ],
            Err(_) => [f64::NAN; 6],
        };
        write!(w, "{}", fmt_f64(pt.param))?;
        for x in row {
            write!(w, ",{}", fmt_f64(x))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
