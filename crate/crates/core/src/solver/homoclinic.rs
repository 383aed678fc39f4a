use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{restrict, Cell, Profile};
use crate::potentials::Potential;

use super::{solve, SolverConfig, WaveSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Periodic maximizers converge to a non-trivial homoclinic wave.
    Localized,
    /// Energies approach `2αρ` and the profiles flatten out.
    Delocalizing,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomoclinicOptions {
    /// Localized requires `T_N >= 2 + margin` at the largest `N`.
    pub margin: f64,
    /// Allowed growth between successive profile differences.
    pub diff_slack: f64,
}

impl Default for HomoclinicOptions {
    fn default() -> Self {
        HomoclinicOptions { margin: 1e-3, diff_slack: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicStep {
    pub n: usize,
    pub converged: bool,
    pub sigma: f64,
    pub t_value: f64,
    pub max_amplitude: f64,
    /// Fraction of the power carried by `|j| > N/4`.
    pub tail_mass: f64,
    /// Sup distance between this and the previous restricted profile.
    pub sup_diff_to_previous: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct HomoclinicReport {
    pub solutions: Vec<WaveSolution>,
    /// Every maximizer restricted onto a common truncated cell.
    pub restricted: Vec<Profile>,
    pub steps: Vec<HomoclinicStep>,
    pub verdict: Verdict,
}

/// Solves along an increasing sequence of periods and classifies the
/// `N → ∞` trend of the restricted maximizers.
///
/// Independent solves run on the rayon pool; results keep input order.
pub fn homoclinic(
    cfg: &SolverConfig,
    p: &Potential,
    n_sequence: &[usize],
    options: HomoclinicOptions,
) -> Result<HomoclinicReport> {
    if n_sequence.len() < 2 {
        return Err(Error::InvalidConfig("the N sequence needs at least two entries".into()));
    }
    if n_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("the N sequence must be strictly increasing".into()));
    }
    let solutions =
        n_sequence.par_iter().map(|&n| solve(&SolverConfig { n, ..cfg.clone() }, p)).collect::<Result<Vec<_>>>()?;

    let n_max = *n_sequence.last().unwrap();
    let common = Cell::truncated(cfg.scheme, n_max as f64 / 2.0 + 1.0)?;
    let restricted = solutions.iter().map(|s| restrict(&s.profile, &common)).collect::<Result<Vec<_>>>()?;

    let mut steps = Vec::with_capacity(solutions.len());
    for (k, (sol, &n)) in solutions.iter().zip(n_sequence).enumerate() {
        let quarter = n as f64 / 4.0;
        let cell = sol.profile.cell();
        let tail: f64 = sol
            .profile
            .values()
            .iter()
            .enumerate()
            .filter(|&(pos, _)| cell.index(pos).abs() > quarter)
            .map(|(_, v)| v * v)
            .sum();
        steps.push(HomoclinicStep {
            n,
            converged: sol.converged,
            sigma: sol.sigma,
            t_value: sol.energies.t_value.unwrap_or(f64::NAN),
            max_amplitude: sol.profile.max_value(),
            tail_mass: tail / sol.energies.power,
            sup_diff_to_previous: (k > 0).then(|| restricted[k].sup_distance(&restricted[k - 1])),
        });
    }
    let verdict = classify(&steps, options);
    Ok(HomoclinicReport { solutions, restricted, steps, verdict })
}

fn classify(steps: &[HomoclinicStep], options: HomoclinicOptions) -> Verdict {
    if steps.iter().any(|s| !s.converged) {
        return Verdict::Undetermined;
    }
    let last = steps.last().expect("non-empty sequence");
    let diffs: Vec<f64> = steps.iter().filter_map(|s| s.sup_diff_to_previous).collect();
    let diffs_settle = diffs.windows(2).all(|w| w[1] <= w[0] + options.diff_slack);
    if last.t_value >= 2.0 + options.margin && diffs_settle {
        return Verdict::Localized;
    }
    let excess_shrinks = steps.windows(2).all(|w| w[1].t_value - 2.0 < w[0].t_value - 2.0);
    let amplitude_shrinks = steps.windows(2).all(|w| w[1].max_amplitude < w[0].max_amplitude);
    if excess_shrinks && amplitude_shrinks && last.t_value < 2.0 + options.margin {
        return Verdict::Delocalizing;
    }
    Verdict::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IndexScheme;

    fn step(n: usize, t: f64, amp: f64, diff: Option<f64>) -> HomoclinicStep {
        HomoclinicStep {
            n,
            converged: true,
            sigma: 0.0,
            t_value: t,
            max_amplitude: amp,
            tail_mass: 0.0,
            sup_diff_to_previous: diff,
        }
    }

    #[test]
    fn classifier_rules() {
        let opts = HomoclinicOptions::default();
        let loc = [step(10, 2.5, 1.0, None), step(20, 2.4, 0.9, Some(1e-2)), step(40, 2.4, 0.9, Some(1e-5))];
        assert_eq!(classify(&loc, opts), Verdict::Localized);
        let deloc = [step(10, 2.01, 0.3, None), step(20, 2.001, 0.2, Some(0.1)), step(40, 2.0001, 0.1, Some(0.1))];
        assert_eq!(classify(&deloc, opts), Verdict::Delocalizing);
        let growing = [step(10, 2.5, 1.0, None), step(20, 2.4, 0.9, Some(1e-5)), step(40, 2.4, 0.9, Some(1e-2))];
        assert_eq!(classify(&growing, opts), Verdict::Undetermined);
        let mut stuck = loc.clone();
        stuck[1].converged = false;
        assert_eq!(classify(&stuck, opts), Verdict::Undetermined);
    }

    #[test]
    fn sequence_validation() {
        let cfg = SolverConfig::new(1.0, 1.0, IndexScheme::OnSite, 10);
        let opts = HomoclinicOptions::default();
        assert!(homoclinic(&cfg, &Potential::Quartic, &[10], opts).is_err());
        assert!(homoclinic(&cfg, &Potential::Quartic, &[20, 10], opts).is_err());
    }
}
