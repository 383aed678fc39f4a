use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{SolverConfig, WaveSolution};

/// Exponential tail fit `u_j ≈ C exp(-d |j|)` of a localized wave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Least-squares rate `d` per lattice site.
    pub fitted_rate: f64,
    /// Fitted prefactor `C`.
    pub prefactor: f64,
    /// `-ln(α / (σ - α))`, the rate guaranteed by the comparison argument.
    pub bound_rate: f64,
    /// `-ln κ` with `σ = α (κ + 1/κ)`, the rate of the linearized tail.
    pub linear_rate: f64,
    /// Inner and outer `|j|` of the fitted window.
    pub tail_window: [f64; 2],
    pub tail_points: usize,
    /// Largest deviation of `ln u_j` from the fitted line.
    pub fit_residual: f64,
}

/// Samples `(|j|, u_j)` of the tail window, ordered outward.
///
/// The window starts where `u` first drops below a tenth of its maximum
/// and ends at the last site above `1e-13 sqrt(ρ)`; on periodic cells it
/// also stops short of `N/2 - 2`, where the periodic images bend the tail.
pub fn tail_window(sol: &WaveSolution, cfg: &SolverConfig) -> Vec<(f64, f64)> {
    let u = &sol.profile;
    let cell = u.cell();
    let max = u.max_value();
    let floor = 1e-13 * cfg.rho.sqrt();
    let outer_limit = cell.period().map(|n| n as f64 / 2.0 - 2.0);
    let half: Vec<(f64, f64)> = cell.orbits().into_iter().map(|(pos, _)| (cell.index(pos), u.values()[pos])).collect();
    let Some(inner) = half.iter().position(|&(_, v)| v < 0.1 * max) else {
        return Vec::new();
    };
    half[inner..].iter().copied().take_while(|&(j, v)| v > floor && outer_limit.is_none_or(|lim| j < lim)).collect()
}

pub fn decay_fit(sol: &WaveSolution, cfg: &SolverConfig) -> Result<DecayFit> {
    let (alpha, sigma) = (cfg.alpha, sol.sigma);
    if !(sigma > 2.0 * alpha) {
        return Err(Error::NotLocalized { sigma, two_alpha: 2.0 * alpha });
    }
    let tail = tail_window(sol, cfg);
    if tail.len() < 4 {
        return Err(Error::TailTooShort { points: tail.len() });
    }
    let n = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |(sx, sy), &(j, v)| (sx + j, sy + v.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = tail.iter().fold((0.0, 0.0), |(sxx, sxy), &(j, v)| {
        let dx = j - mx;
        (sxx + dx * dx, sxy + dx * (v.ln() - my))
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = tail.iter().map(|&(j, v)| (v.ln() - (intercept + slope * j)).abs()).fold(0.0, f64::max);
    let kappa = (sigma - (sigma * sigma - 4.0 * alpha * alpha).sqrt()) / (2.0 * alpha);
    Ok(DecayFit {
        fitted_rate: -slope,
        prefactor: intercept.exp(),
        bound_rate: -(alpha / (sigma - alpha)).ln(),
        linear_rate: -kappa.ln(),
        tail_window: [tail[0].0, tail[tail.len() - 1].0],
        tail_points: tail.len(),
        fit_residual,
    })
}
