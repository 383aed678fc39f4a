//! Time integration of `i A_j' + α(A_{j+1} + A_{j-1}) + Ψ'(|A_j|²) A_j = 0`.
//!
//! Standing waves are relative equilibria `A_j(t) = e^{iσt} u_j`; the
//! checks here integrate a computed wave and measure how far the modulus
//! moves and how fast the phase turns. Classical RK4 is used; power and
//! Hamiltonian are monitored, not enforced.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Cell, CellSize, Profile};
use crate::potentials::Potential;
use crate::solver::WaveSolution;

const BLOW_UP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState {
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
    pub cell: Cell,
}

impl EvolutionState {
    /// Real initial data `A_j(0) = u_j`.
    pub fn from_profile(u: &Profile) -> Self {
        EvolutionState {
            time: 0.0,
            amplitudes: u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            cell: *u.cell(),
        }
    }

    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `H = 2α N - α L - W`, with `L = Σ Re(conj(A_j)(A_{j+1} + A_{j-1}))`.
    pub fn hamiltonian(&self, p: &Potential, alpha: f64) -> f64 {
        let a = &self.amplitudes;
        let coupling: f64 = (0..a.len()).map(|j| (a[j].conj() * neighbor_sum(&self.cell, a, j)).re).sum();
        let w: f64 = a.iter().map(|z| p.psi(z.norm_sqr())).sum();
        2.0 * alpha * self.power() - alpha * coupling - w
    }
}

#[inline]
fn neighbor_sum(cell: &Cell, a: &[Complex64], j: usize) -> Complex64 {
    let n = a.len();
    match cell.size() {
        CellSize::Periodic(_) => a[(j + 1) % n] + a[(j + n - 1) % n],
        CellSize::Truncated { .. } => {
            let zero = Complex64::new(0.0, 0.0);
            let right = if j + 1 < n { a[j + 1] } else { zero };
            let left = if j > 0 { a[j - 1] } else { zero };
            right + left
        }
    }
}

fn rhs_into(cell: &Cell, a: &[Complex64], p: &Potential, alpha: f64, out: &mut [Complex64]) {
    for j in 0..a.len() {
        let force = alpha * neighbor_sum(cell, a, j) + p.dpsi(a[j].norm_sqr()) * a[j];
        // i * force
        out[j] = Complex64::new(-force.im, force.re);
    }
}

/// `A_j' = i [α(A_{j+1} + A_{j-1}) + Ψ'(|A_j|²) A_j]`.
pub fn rhs(state: &EvolutionState, p: &Potential, alpha: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    rhs_into(&state.cell, &state.amplitudes, p, alpha, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationDiagnostics {
    pub steps: u64,
    /// Step actually used, `t_end / steps`.
    pub dt: f64,
    /// `max_t |N(t) - N(0)| / N(0)`.
    pub power_drift: f64,
    /// `max_t |H(t) - H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub hamiltonian_drift: f64,
}

fn relative(delta: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        delta.abs()
    } else {
        (delta / reference).abs()
    }
}

/// Fixed-step RK4 from `state.time` to `state.time + t_end`.
///
/// `observer` sees the state after every step (and the initial state).
pub fn integrate(
    state: &EvolutionState,
    p: &Potential,
    alpha: f64,
    t_end: f64,
    dt: f64,
    observer: &mut dyn FnMut(u64, &EvolutionState),
) -> Result<(EvolutionState, IntegrationDiagnostics)> {
    if !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!("alpha must be finite, got {alpha}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_end must be non-negative, got {t_end}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let steps = if t_end == 0.0 { 0 } else { (t_end / dt - 1e-9).ceil().max(1.0) as u64 };
    let h = if steps == 0 { dt } else { t_end / steps as f64 };

    let n = state.amplitudes.len();
    let cell = state.cell;
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];

    let mut current = state.clone();
    let t0 = state.time;
    let power0 = current.power();
    let h0 = current.hamiltonian(p, alpha);
    let mut diag = IntegrationDiagnostics { steps, dt: h, power_drift: 0.0, hamiltonian_drift: 0.0 };
    observer(0, &current);

    for step in 1..=steps {
        let a = &current.amplitudes;
        rhs_into(&cell, a, p, alpha, &mut k1);
        for j in 0..n {
            tmp[j] = a[j] + 0.5 * h * k1[j];
        }
        rhs_into(&cell, &tmp, p, alpha, &mut k2);
        for j in 0..n {
            tmp[j] = a[j] + 0.5 * h * k2[j];
        }
        rhs_into(&cell, &tmp, p, alpha, &mut k3);
        for j in 0..n {
            tmp[j] = a[j] + h * k3[j];
        }
        rhs_into(&cell, &tmp, p, alpha, &mut k4);
        for j in 0..n {
            current.amplitudes[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        current.time = t0 + step as f64 * h;

        if let Some(site) = current.amplitudes.iter().position(|z| !(z.norm() <= BLOW_UP)) {
            return Err(Error::BlowUp { time: current.time, site });
        }
        diag.power_drift = diag.power_drift.max(relative(current.power() - power0, power0));
        diag.hamiltonian_drift = diag.hamiltonian_drift.max(relative(current.hamiltonian(p, alpha) - h0, h0));
        observer(step, &current);
    }
    Ok((current, diag))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeEquilibriumReport {
    /// `max_{t,j} ||A_j(t)| - |u_j||`.
    pub modulus_drift: f64,
    /// `max_{t,j} |A_j(t) - e^{iσt} u_j|`.
    pub orbit_error: f64,
    /// Unwrapped phase advance of the central site divided by elapsed time.
    pub measured_sigma: f64,
    pub sigma_mismatch: f64,
    /// `|arg A_c(T) - σT|`, wrapped into `[0, π]`.
    pub phase_error: f64,
    pub power_drift: f64,
    pub hamiltonian_drift: f64,
    pub center_index: f64,
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y - two_pi
    } else {
        y
    }
}

/// Integrates `A(0) = u` and compares with the rotating wave `e^{iσt} u`.
pub fn check_relative_equilibrium(
    u: &Profile,
    sigma: f64,
    p: &Potential,
    alpha: f64,
    t_end: f64,
    dt: f64,
) -> Result<RelativeEquilibriumReport> {
    check_relative_equilibrium_observed(u, sigma, p, alpha, t_end, dt, &mut |_, _| {})
}

/// [`check_relative_equilibrium`], also passing every state to `observer`.
pub fn check_relative_equilibrium_observed(
    u: &Profile,
    sigma: f64,
    p: &Potential,
    alpha: f64,
    t_end: f64,
    dt: f64,
    observer: &mut dyn FnMut(u64, &EvolutionState),
) -> Result<RelativeEquilibriumReport> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidConfig(format!("t_end must be positive, got {t_end}")));
    }
    let start = EvolutionState::from_profile(u);
    let center = u
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best })
        .0;
    let mut modulus_drift = 0.0f64;
    let mut orbit_error = 0.0f64;
    let mut last_phase = start.amplitudes[center].arg();
    let mut unwrapped = 0.0;
    let (end, diag) = integrate(&start, p, alpha, t_end, dt, &mut |step, s| {
        observer(step, s);
        let rotation = Complex64::from_polar(1.0, sigma * s.time);
        for (a, &v) in s.amplitudes.iter().zip(u.values()) {
            modulus_drift = modulus_drift.max((a.norm() - v.abs()).abs());
            orbit_error = orbit_error.max((a - rotation * v).norm());
        }
        let phase = s.amplitudes[center].arg();
        unwrapped += wrap_angle(phase - last_phase);
        last_phase = phase;
    })?;
    let measured_sigma = unwrapped / (end.time - start.time);
    Ok(RelativeEquilibriumReport {
        modulus_drift,
        orbit_error,
        measured_sigma,
        sigma_mismatch: (measured_sigma - sigma).abs(),
        phase_error: wrap_angle(unwrapped - sigma * (end.time - start.time)).abs(),
        power_drift: diag.power_drift,
        hamiltonian_drift: diag.hamiltonian_drift,
        center_index: u.cell().index(center),
    })
}

/// [`check_relative_equilibrium`] for a solver result.
pub fn relative_equilibrium_check(
    sol: &WaveSolution,
    p: &Potential,
    alpha: f64,
    t_end: f64,
    dt: f64,
) -> Result<RelativeEquilibriumReport> {
    if !sol.converged {
        return Err(Error::InvalidConfig("relative-equilibrium check needs a converged wave".into()));
    }
    check_relative_equilibrium(&sol.profile, sol.sigma, p, alpha, t_end, dt)
}
