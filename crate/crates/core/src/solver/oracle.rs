//! Brute-force maximization of `P` on the cone-sphere intersection for tiny
//! cells, used to cross-check the iteration.
//!
//! A cone profile is determined by its values on `j >= 0`, which are
//! non-increasing. With orbit multiplicities `m_i` the sphere constraint is
//! `Σ m_i v_i² = ρ`, parametrized by spherical angles over the positive
//! orthant. For `N <= 4` there are at most three orbits, i.e. two angles.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::functionals;
use crate::lattice::{Cell, Profile};
use crate::potentials::Potential;

use super::SolverConfig;

const REFINE_ROUNDS: usize = 60;
const REFINE_POINTS: usize = 21;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub profile: Profile,
    pub p_total: f64,
    pub evaluations: u64,
}

struct Search<'a> {
    cell: Cell,
    orbits: Vec<(usize, Option<usize>)>,
    scales: Vec<f64>,
    p: &'a Potential,
    alpha: f64,
    evaluations: u64,
}

impl Search<'_> {
    fn amplitudes(&self, angles: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.orbits.len());
        let mut remaining = 1.0;
        for &a in angles {
            w.push(remaining * a.cos());
            remaining *= a.sin();
        }
        w.push(remaining);
        w.iter().zip(&self.scales).map(|(w, s)| w * s).collect()
    }

    fn profile(&self, amplitudes: &[f64]) -> Profile {
        let mut values = vec![0.0; self.cell.len()];
        for (&(pos, mirror), &v) in self.orbits.iter().zip(amplitudes) {
            values[pos] = v;
            if let Some(m) = mirror {
                values[m] = v;
            }
        }
        Profile::new(self.cell, values).expect("finite amplitudes")
    }

    /// Energy at the given angles, `None` outside the cone.
    fn energy(&mut self, angles: &[f64]) -> Option<f64> {
        let v = self.amplitudes(angles);
        if v.windows(2).any(|w| w[0] < w[1]) {
            return None;
        }
        self.evaluations += 1;
        Some(functionals::p_total(&self.profile(&v), self.p, self.alpha))
    }

    fn scan(&mut self, lo: &[f64], hi: &[f64], points: usize, best: &mut (f64, Vec<f64>)) {
        let dims = lo.len();
        let total = points.pow(dims as u32);
        let mut angles = vec![0.0; dims];
        for flat in 0..total {
            let mut rest = flat;
            for d in 0..dims {
                let k = rest % points;
                rest /= points;
                angles[d] = lo[d] + (hi[d] - lo[d]) * k as f64 / (points - 1) as f64;
            }
            if let Some(e) = self.energy(&angles) {
                if e > best.0 {
                    *best = (e, angles.clone());
                }
            }
        }
    }
}

/// Maximizes `P` over the cone-sphere intersection of a periodic cell with
/// `N <= 4` by a uniform angular grid followed by local zooming.
pub fn oracle_maximize(cfg: &SolverConfig, p: &Potential, grid_points: usize) -> Result<OracleResult> {
    cfg.validate()?;
    if cfg.n > 4 {
        return Err(Error::InvalidConfig(format!("the oracle handles N ≤ 4, got {}", cfg.n)));
    }
    if grid_points < 2 {
        return Err(Error::InvalidConfig("grid_points must be ≥ 2".into()));
    }
    let cell = cfg.cell();
    let orbits = cell.orbits();
    let scales = orbits
        .iter()
        .map(|(_, mirror)| {
            let multiplicity = if mirror.is_some() { 2.0 } else { 1.0 };
            (cfg.rho / multiplicity).sqrt()
        })
        .collect();
    let mut search = Search { cell, orbits, scales, p, alpha: cfg.alpha, evaluations: 0 };
    let dims = search.orbits.len() - 1;
    debug_assert!(dims <= 2);

    let mut best = (f64::NEG_INFINITY, vec![0.0; dims]);
    if dims == 0 {
        best.0 = search.energy(&[]).expect("single point lies in the cone");
    } else {
        let coarse = if dims == 1 { grid_points } else { grid_points.min(2000) };
        search.scan(&vec![0.0; dims], &vec![FRAC_PI_2; dims], coarse, &mut best);
        let mut spacing = FRAC_PI_2 / (coarse - 1) as f64;
        for _ in 0..REFINE_ROUNDS {
            let lo: Vec<f64> = best.1.iter().map(|a| (a - 2.0 * spacing).max(0.0)).collect();
            let hi: Vec<f64> = best.1.iter().map(|a| (a + 2.0 * spacing).min(FRAC_PI_2)).collect();
            search.scan(&lo, &hi, REFINE_POINTS, &mut best);
            spacing *= 4.0 / (REFINE_POINTS - 1) as f64;
        }
    }
    let amplitudes = search.amplitudes(&best.1);
    Ok(OracleResult { profile: search.profile(&amplitudes), p_total: best.0, evaluations: search.evaluations })
}
