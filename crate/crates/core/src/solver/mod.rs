//! Constrained maximization of `P` on the sphere `||u||² = ρ` within the
//! cone of even unimodal profiles.
//!
//! The iteration is the normalized explicit step of the constrained gradient
//! flow `u' = ∂P(u) - σ(u) u`:
//!
//! ```text
//! I(u) = sqrt(ρ) (u + τ F(u)) / ||u + τ F(u)||,   F(u) = ∂P(u) - σ(u) u
//! ```
//!
//! Fixed points of `I` are exactly the standing waves, independent of `τ`.

mod ansatz;
mod decay;
mod homoclinic;
mod oracle;

pub use ansatz::{ansatz_terms, ansatz_weights, initial_ansatz};
pub use decay::{decay_fit, tail_window, DecayFit};
pub use homoclinic::{homoclinic, HomoclinicOptions, HomoclinicReport, HomoclinicStep, Verdict};
pub use oracle::{oracle_maximize, OracleResult};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, EnergyBreakdown};
use crate::lattice::{in_cone, project_cone, Cell, IndexScheme, Profile};
use crate::potentials::{check_assumptions, Potential};

/// Slack used when monitoring cone membership of iterates.
pub const CONE_SLACK: f64 = 1e-12;
/// Rounding allowance when comparing values of `P` across iterates.
pub const ENERGY_SLACK: f64 = 1e-14;
/// Maximal number of step halvings per iteration.
pub const MAX_HALVINGS: u32 = 30;
/// Sup distance to the constant profile below which a result is flagged.
pub const NEAR_CONSTANT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConeGuard {
    Off,
    /// Count and log iterates that leave the cone, never alter them.
    #[default]
    Monitor,
    /// Project iterates back onto the cone and renormalize.
    Project,
}

impl std::str::FromStr for ConeGuard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(ConeGuard::Off),
            "monitor" => Ok(ConeGuard::Monitor),
            "project" => Ok(ConeGuard::Project),
            _ => Err(Error::Parse(format!("unknown cone guard '{s}' (off|monitor|project)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub alpha: f64,
    pub rho: f64,
    pub scheme: IndexScheme,
    pub n: usize,
    pub tau: f64,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iters: u64,
    pub cone_guard: ConeGuard,
    pub backtracking: bool,
    pub ansatz_samples: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 1.0,
            rho: 1.0,
            scheme: IndexScheme::OnSite,
            n: 25,
            tau: 1.0,
            tol_residual: 1e-10,
            tol_step: 1e-12,
            max_iters: 1_000_000,
            cone_guard: ConeGuard::Monitor,
            backtracking: true,
            ansatz_samples: 100,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn new(alpha: f64, rho: f64, scheme: IndexScheme, n: usize) -> Self {
        SolverConfig { alpha, rho, scheme, n, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be > 0, got {}", self.rho));
        }
        if self.n < 2 {
            return bad("N must be ≥ 2".into());
        }
        if !(self.tau > 0.0 && self.tau <= 1e3) {
            return bad(format!("tau must lie in (0, 1e3], got {}", self.tau));
        }
        if !(self.tol_residual > 0.0) || !(self.tol_step > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be ≥ 1".into());
        }
        if self.ansatz_samples == 0 {
            return bad("ansatz_samples must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn cell(&self) -> Cell {
        Cell::periodic(self.scheme, self.n).expect("validated N")
    }
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Residual,
    Stagnation,
    /// Backtracking exhausted all halvings without an admissible step.
    LineSearchFailed,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveSolution {
    pub profile: Profile,
    /// Wave frequency `σ` in `σ u_j = α(u_{j+1}+u_{j-1}) + Ψ'(u_j²) u_j`.
    pub sigma: f64,
    pub energies: EnergyBreakdown,
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
    pub termination: Termination,
    pub in_cone: bool,
    pub near_constant: bool,
    /// Accepted iterates found outside the cone while monitoring.
    pub cone_violations: u64,
    pub decay: Option<DecayFit>,
}

impl WaveSolution {
    /// `(Σu²)² / (N Σu⁴)`: close to 1 for flat profiles, `1/N` for a single site.
    pub fn participation_ratio(&self) -> f64 {
        participation_ratio(&self.profile)
    }
}

pub fn participation_ratio(u: &Profile) -> f64 {
    let s2: f64 = u.values().iter().map(|v| v * v).sum();
    let s4: f64 = u.values().iter().map(|v| v.powi(4)).sum();
    if s4 == 0.0 {
        return 0.0;
    }
    s2 * s2 / (u.len() as f64 * s4)
}

/// One accepted iterate, reported to observers of [`solve_observed`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterateRecord {
    /// 0 for the main run, 1 for the perturbed restart.
    pub trajectory: u8,
    pub iteration: u64,
    pub power: f64,
    pub p_total: f64,
    /// Energy gained by this iterate over the previous one.
    pub gain: f64,
    pub residual: f64,
    pub in_cone: bool,
    pub tau: f64,
}

/// Outcome of a single application of `I`.
#[derive(Clone, Debug)]
pub struct Step {
    pub profile: Profile,
    pub p_total: f64,
    /// `P(profile) - P(u)`, computed from the increment.
    pub gain: f64,
    pub tau: f64,
    pub halvings: u32,
    /// False when backtracking found no admissible step; `profile` is then
    /// the input.
    pub accepted: bool,
}

struct Direction {
    flow: Vec<f64>,
    /// `||F||_∞ / 2`, the standing-wave residual at frequency `σ_N / 2`.
    residual: f64,
    multiplier: f64,
}

fn flow_direction(u: &Profile, p: &Potential, alpha: f64) -> Result<Direction> {
    let grad = functionals::grad_p(u, p, alpha);
    let n = u.norm_sq();
    if n == 0.0 {
        return Err(Error::DegenerateProfile("zero iterate"));
    }
    let multiplier = grad.dot(u) / n;
    let flow: Vec<f64> = grad.values().iter().zip(u.values()).map(|(g, x)| g - multiplier * x).collect();
    let residual = 0.5 * flow.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    Ok(Direction { flow, residual, multiplier })
}

/// One Newton correction of the scale factor against an accurately
/// summed power, so that the iterate sits on the sphere to within the
/// rounding of its entries.
fn onto_sphere(u: Profile, rho: f64) -> Profile {
    let n = functionals::power_accurate(u.values());
    u.scaled(1.0 + (rho - n) / (2.0 * n))
}

fn step_with(u: &Profile, dir: &Direction, p_current: f64, cfg: &SolverConfig, p: &Potential) -> Result<Step> {
    let mut tau = cfg.tau;
    let mut halvings = 0;
    loop {
        let raw: Vec<f64> = u.values().iter().zip(&dir.flow).map(|(x, f)| x + tau * f).collect();
        let mut next = Profile::new(*u.cell(), raw)?;
        let norm = next.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateProfile("u + τF vanished"));
        }
        next = onto_sphere(next.scaled(cfg.rho.sqrt() / norm), cfg.rho);
        if cfg.cone_guard == ConeGuard::Project && !in_cone(&next, CONE_SLACK) {
            next = project_cone(&next).normalized(cfg.rho)?;
        }
        // the sphere is only hit to rounding accuracy; remove the first-order
        // energy change caused by that power mismatch
        let power_shift: f64 = next.values().iter().zip(u.values()).map(|(b, a)| (b - a) * (b + a)).sum();
        let gain = functionals::p_increment(u, &next, p, cfg.alpha) - 0.5 * dir.multiplier * power_shift;
        if !cfg.backtracking || gain >= 0.0 {
            let p_next = functionals::p_total(&next, p, cfg.alpha);
            return Ok(Step { profile: next, p_total: p_next, gain, tau, halvings, accepted: true });
        }
        if halvings == MAX_HALVINGS {
            return Ok(Step { profile: u.clone(), p_total: p_current, gain: 0.0, tau, halvings, accepted: false });
        }
        tau *= 0.5;
        halvings += 1;
    }
}

/// One application of the normalized iteration map with backtracking.
pub fn iterate_step(u: &Profile, cfg: &SolverConfig, p: &Potential) -> Result<Step> {
    let dir = flow_direction(u, p, cfg.alpha)?;
    let p_current = functionals::p_total(u, p, cfg.alpha);
    step_with(u, &dir, p_current, cfg, p)
}

/// `I(u)`; see the module documentation.
pub fn iterate_once(u: &Profile, cfg: &SolverConfig, p: &Potential) -> Result<Profile> {
    Ok(iterate_step(u, cfg, p)?.profile)
}

struct FlowRun {
    profile: Profile,
    iterations: u64,
    residual: f64,
    termination: Termination,
    cone_violations: u64,
}

fn run_flow(
    start: Profile,
    cfg: &SolverConfig,
    p: &Potential,
    trajectory: u8,
    observer: &mut dyn FnMut(&IterateRecord),
) -> Result<FlowRun> {
    let mut u = start;
    let mut p_current = functionals::p_total(&u, p, cfg.alpha);
    let mut violations = 0u64;
    let mut iterations = 0u64;
    let monitor = cfg.cone_guard == ConeGuard::Monitor;
    let initially_in_cone = in_cone(&u, CONE_SLACK);
    let mut dir = flow_direction(&u, p, cfg.alpha)?;
    observer(&IterateRecord {
        trajectory,
        iteration: 0,
        power: u.norm_sq(),
        p_total: p_current,
        gain: 0.0,
        residual: dir.residual,
        in_cone: initially_in_cone,
        tau: 0.0,
    });

    let termination = loop {
        if dir.residual <= cfg.tol_residual {
            break Termination::Residual;
        }
        if iterations >= cfg.max_iters {
            break Termination::MaxIters;
        }
        let step = step_with(&u, &dir, p_current, cfg, p)?;
        if !step.accepted {
            break Termination::LineSearchFailed;
        }
        iterations += 1;
        let change = step.profile.sup_distance(&u);
        u = step.profile;
        p_current = step.p_total;
        dir = flow_direction(&u, p, cfg.alpha)?;
        let inside = in_cone(&u, CONE_SLACK);
        if monitor && !inside {
            if violations == 0 {
                warn!("iterate {iterations} left the cone (N={}, tau={})", cfg.n, step.tau);
            }
            violations += 1;
        }
        observer(&IterateRecord {
            trajectory,
            iteration: iterations,
            power: u.norm_sq(),
            p_total: p_current,
            gain: step.gain,
            residual: dir.residual,
            in_cone: inside,
            tau: step.tau,
        });
        if change <= cfg.tol_step {
            break Termination::Stagnation;
        }
    };
    debug!("flow finished after {iterations} iterations: {termination:?}, residual {}", dir.residual);
    Ok(FlowRun { profile: u, iterations, residual: dir.residual, termination, cone_violations: violations })
}

fn is_near_constant(u: &Profile, rho: f64) -> bool {
    let c = (rho / u.len() as f64).sqrt();
    u.values().iter().all(|v| (v - c).abs() <= NEAR_CONSTANT_TOL)
}

/// The constant profile with `1e-3 sqrt(ρ)` added at the central sites.
fn perturbed_constant(cell: Cell, rho: f64) -> Result<Profile> {
    let mut u = Profile::constant(cell, rho);
    let bump = 1e-3 * rho.sqrt();
    let center: &[i64] = match cell.scheme() {
        IndexScheme::OnSite => &[0],
        IndexScheme::InterSite => &[-1, 1],
    };
    for &d in center {
        if let Some(pos) = cell.position(d) {
            u.values_mut()[pos] += bump;
        }
    }
    u.normalized(rho)
}

/// Computes a standing wave by iterating `I` from the best ansatz.
pub fn solve(cfg: &SolverConfig, p: &Potential) -> Result<WaveSolution> {
    solve_observed(cfg, p, &mut |_| {})
}

/// [`solve`] with a callback invoked on the start point and every accepted
/// iterate of each trajectory.
pub fn solve_observed(
    cfg: &SolverConfig,
    p: &Potential,
    observer: &mut dyn FnMut(&IterateRecord),
) -> Result<WaveSolution> {
    cfg.validate()?;
    let report = check_assumptions(p, cfg.rho, 200)?;
    if !report.passed {
        let v = &report.violations[0];
        return Err(Error::InvalidConfig(format!(
            "potential {p} violates {:?} at x = {} ({} violations on [0, rho])",
            v.check,
            v.x,
            report.violations.len()
        )));
    }

    let start = initial_ansatz(cfg, p)?;
    let mut run = run_flow(start, cfg, p, 0, observer)?;
    let mut iterations = run.iterations;
    let mut violations = run.cone_violations;

    if is_near_constant(&run.profile, cfg.rho) {
        debug!("iterate settled near the constant profile; retrying from a perturbed start");
        let restart = run_flow(perturbed_constant(cfg.cell(), cfg.rho)?, cfg, p, 1, observer)?;
        iterations += restart.iterations;
        violations += restart.cone_violations;
        let p_main = functionals::p_total(&run.profile, p, cfg.alpha);
        let p_restart = functionals::p_total(&restart.profile, p, cfg.alpha);
        let restart_ok = restart.residual <= cfg.tol_residual || run.residual > cfg.tol_residual;
        if p_restart > p_main && restart_ok {
            run = restart;
        }
    }

    let profile = run.profile;
    let sigma = functionals::frequency(&profile, p, cfg.alpha)?;
    let residual = functionals::residual(&profile, sigma, p, cfg.alpha);
    let energies = functionals::energy(&profile, p, cfg.alpha)?;
    let converged = residual <= cfg.tol_residual;
    if !converged {
        warn!("no convergence: residual {residual:.3e} after {iterations} iterations ({:?})", run.termination);
    }
    let mut solution = WaveSolution {
        in_cone: in_cone(&profile, CONE_SLACK),
        near_constant: is_near_constant(&profile, cfg.rho),
        profile,
        sigma,
        energies,
        residual,
        iterations,
        converged,
        termination: run.termination,
        cone_violations: violations,
        decay: None,
    };
    if converged && sigma > 2.0 * cfg.alpha {
        solution.decay = decay_fit(&solution, cfg).ok();
    }
    Ok(solution)
}
