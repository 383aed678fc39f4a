use crate::error::Result;
use crate::functionals;
use crate::lattice::{in_cone, project_cone, Cell, Profile};
use crate::potentials::Potential;

use super::{SolverConfig, CONE_SLACK};

/// The four shape functions of the starting guess, evaluated on `cell`:
/// constant, central indicator `|j| < 1`, `1 + cos(πj/N)` and
/// `exp(-20 (j/N)²)`.
pub fn ansatz_terms(cell: &Cell) -> [Vec<f64>; 4] {
    let n = cell.len() as f64;
    let idx = cell.indices();
    [
        vec![1.0; idx.len()],
        idx.iter().map(|j| if j.abs() < 1.0 { 1.0 } else { 0.0 }).collect(),
        idx.iter().map(|j| 1.0 + (std::f64::consts::PI * j / n).cos()).collect(),
        idx.iter().map(|j| (-20.0 * (j / n).powi(2)).exp()).collect(),
    ]
}

/// Non-negative integer weight tuples summing to the smallest `S` whose
/// simplex lattice holds at least `samples` points, in lexicographic order.
pub fn ansatz_weights(samples: usize) -> Vec<[u32; 4]> {
    let count = |s: u64| (s + 1) * (s + 2) * (s + 3) / 6;
    let mut total = 1u64;
    while count(total) < samples as u64 {
        total += 1;
    }
    let s = total as u32;
    let mut out = Vec::with_capacity(count(total) as usize);
    for a in (0..=s).rev() {
        for b in (0..=s - a).rev() {
            for c in (0..=s - a - b).rev() {
                out.push([a, b, c, s - a - b - c]);
            }
        }
    }
    out
}

/// Best normalized combination of the shape functions by energy.
///
/// Ties keep the first candidate in enumeration order.
pub fn initial_ansatz(cfg: &SolverConfig, p: &Potential) -> Result<Profile> {
    cfg.validate()?;
    let cell = cfg.cell();
    let terms = ansatz_terms(&cell);
    let mut best: Option<(f64, Profile)> = None;
    for weights in ansatz_weights(cfg.ansatz_samples) {
        let values: Vec<f64> =
            (0..cell.len()).map(|i| weights.iter().zip(&terms).map(|(&w, t)| w as f64 * t[i]).sum()).collect();
        let candidate = Profile::new(cell, values)?.normalized(cfg.rho)?;
        let energy = functionals::p_total(&candidate, p, cfg.alpha);
        if best.as_ref().is_none_or(|(e, _)| energy > *e) {
            best = Some((energy, candidate));
        }
    }
    let (_, u) = best.expect("at least one ansatz candidate");
    if in_cone(&u, CONE_SLACK) {
        Ok(u)
    } else {
        project_cone(&u).normalized(cfg.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IndexScheme;

    #[test]
    fn weight_lattice_sizes() {
        assert_eq!(ansatz_weights(56).len(), 56);
        assert_eq!(ansatz_weights(100).len(), 120);
        assert_eq!(ansatz_weights(1).len(), 4);
        assert_eq!(ansatz_weights(100)[0], [7, 0, 0, 0]);
        assert!(ansatz_weights(100).iter().all(|w| w.iter().sum::<u32>() == 7));
    }

    #[test]
    fn ansatz_is_normalized_and_in_cone() {
        for p in Potential::catalog() {
            for scheme in [IndexScheme::OnSite, IndexScheme::InterSite] {
                for n in [2usize, 3, 4, 9, 24, 25, 41] {
                    let cfg = SolverConfig::new(0.8, 2.5, scheme, n);
                    let u = initial_ansatz(&cfg, &p).unwrap();
                    assert!((u.norm_sq() - cfg.rho).abs() <= 1e-12 * cfg.rho);
                    assert!(in_cone(&u, 0.0), "{p} {scheme} N={n}");
                }
            }
        }
    }

    #[test]
    fn constant_candidate_energy() {
        // with a single sample the lattice still contains the pure constant
        let cfg = SolverConfig::new(1.0, 2.0, IndexScheme::OnSite, 41);
        let cell = cfg.cell();
        let p = Potential::ExpQuadratic;
        let u = Profile::new(cell, ansatz_terms(&cell)[0].clone()).unwrap().normalized(cfg.rho).unwrap();
        let expected = 2.0 * cfg.alpha * cfg.rho + 41.0 * p.psi(cfg.rho / 41.0);
        assert!((functionals::p_total(&u, &p, 1.0) - expected).abs() <= 1e-13 * expected);
        // below the excitation threshold the constant candidate wins
        let best = initial_ansatz(&cfg, &p).unwrap();
        assert!(best.sup_distance(&u) <= 1e-15);
    }
}
