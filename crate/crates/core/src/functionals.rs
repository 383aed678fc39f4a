//! Energy functionals on lattice profiles.
//!
//! For a profile `u` on a cell `Z`:
//!
//! * power `N(u) = Σ u_j²`
//! * coupling `L(u) = Σ u_j (u_{j+1} + u_{j-1})`
//! * potential energy `W(u) = Σ Ψ(u_j²)`
//! * total energy `P(u) = α L(u) + W(u)` and Hamiltonian `H = 2α N - P`
//!
//! Periodic cells wrap around; truncated cells see zeros beyond `J_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Cell, IndexScheme, Profile};
use crate::potentials::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub power: f64,
    pub coupling: f64,
    pub potential_energy: f64,
    pub p_total: f64,
    pub hamiltonian: f64,
    /// `P / (α N)`; absent for the zero profile.
    pub t_value: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")))
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        carry += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + carry
}

/// `Σ u_j²` with exact products and a compensated sum.
pub(crate) fn power_accurate(values: &[f64]) -> f64 {
    compensated_sum(values.iter().flat_map(|&v| {
        let hi = v * v;
        [hi, v.mul_add(v, -hi)]
    }))
}

pub fn power(u: &Profile) -> f64 {
    u.norm_sq()
}

/// `2 Σ u_j u_{j+1}` over the bonds of the cell, with exact products.
pub fn coupling(u: &Profile) -> f64 {
    let v = u.values();
    let n = v.len();
    let bonds = if u.cell().is_periodic() { n } else { n.saturating_sub(1) };
    2.0 * compensated_sum((0..bonds).flat_map(|i| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let hi = a * b;
        [hi, a.mul_add(b, -hi)]
    }))
}

/// `Σ Ψ(u_j²)`, correcting each term for the rounding of `u_j²`.
pub fn potential_energy(u: &Profile, p: &Potential) -> f64 {
    compensated_sum(u.values().iter().flat_map(|&v| {
        let x = v * v;
        let lo = v.mul_add(v, -x);
        [p.psi(x), p.dpsi(x) * lo]
    }))
}

/// `Ψ(y²) - Ψ(x²)`. When the arguments are close, Simpson's rule on `Ψ'`
/// with `y² - x² = (y - x)(y + x)` keeps full relative precision; rounding
/// the squares first would not.
fn psi_difference(p: &Potential, x: f64, y: f64) -> f64 {
    let (a, b) = (x * x, y * y);
    let d = (y - x) * (y + x);
    if d.abs() <= 1e-4 * a.max(b).max(1e-8) {
        d / 6.0 * (p.dpsi(a) + 4.0 * p.dpsi(0.5 * (a + b)) + p.dpsi(b))
    } else {
        p.psi(b) - p.psi(a)
    }
}

/// `P(v) - P(u)` evaluated from the increment `v - u`.
///
/// Subtracting two values of [`p_total`] loses everything below the
/// rounding level of `P` itself; near a maximizer that is where the whole
/// difference lives. Uses `L(v) - L(u) = Σ (v_j - u_j)(n_j(u) + n_j(v))`
/// with `n_j` the neighbour sum.
pub fn p_increment(u: &Profile, v: &Profile, p: &Potential, alpha: f64) -> f64 {
    let cell = u.cell();
    let (a, b) = (u.values(), v.values());
    debug_assert_eq!(a.len(), b.len());
    (0..a.len())
        .map(|i| {
            let coupling = (b[i] - a[i]) * (cell.neighbor_sum(a, i) + cell.neighbor_sum(b, i));
            alpha * coupling + psi_difference(p, a[i], b[i])
        })
        .sum()
}

/// `P(u) = α L(u) + W(u)` without the full breakdown.
pub fn p_total(u: &Profile, p: &Potential, alpha: f64) -> f64 {
    alpha * coupling(u) + potential_energy(u, p)
}

pub fn energy(u: &Profile, p: &Potential, alpha: f64) -> Result<EnergyBreakdown> {
    check_alpha(alpha)?;
    let power = power(u);
    let coupling = coupling(u);
    let potential_energy = potential_energy(u, p);
    let p_total = alpha * coupling + potential_energy;
    Ok(EnergyBreakdown {
        power,
        coupling,
        potential_energy,
        p_total,
        hamiltonian: 2.0 * alpha * power - p_total,
        t_value: (power > 0.0).then(|| p_total / (alpha * power)),
    })
}

/// `∂P(u)_j = 2α (u_{j+1} + u_{j-1}) + 2 Ψ'(u_j²) u_j`.
pub fn grad_p(u: &Profile, p: &Potential, alpha: f64) -> Profile {
    let cell = *u.cell();
    let v = u.values();
    let g = (0..v.len()).map(|i| 2.0 * alpha * cell.neighbor_sum(v, i) + 2.0 * p.dpsi(v[i] * v[i]) * v[i]).collect();
    Profile::new(cell, g).expect("gradient of a finite profile is finite")
}

/// Lagrange multiplier `⟨∂P(u), u⟩ / ||u||²` of the constrained flow.
///
/// Since `∂P` carries a factor two relative to the standing-wave equation,
/// this equals twice the wave frequency; see [`frequency`].
pub fn sigma(u: &Profile, p: &Potential, alpha: f64) -> Result<f64> {
    let n = u.norm_sq();
    if n == 0.0 {
        return Err(Error::DegenerateProfile("sigma of the zero profile"));
    }
    Ok(grad_p(u, p, alpha).dot(u) / n)
}

/// Frequency `σ` such that `σ u ≈ α(u_{j+1}+u_{j-1}) + Ψ'(u_j²) u_j` in the
/// least-squares sense.
pub fn frequency(u: &Profile, p: &Potential, alpha: f64) -> Result<f64> {
    Ok(0.5 * sigma(u, p, alpha)?)
}

/// Sup-norm defect of the standing-wave equation
/// `σ u_j = α(u_{j+1}+u_{j-1}) + Ψ'(u_j²) u_j`.
pub fn residual(u: &Profile, sigma: f64, p: &Potential, alpha: f64) -> f64 {
    let cell = u.cell();
    let v = u.values();
    (0..v.len())
        .map(|i| {
            let x = v[i];
            (sigma * x - alpha * cell.neighbor_sum(v, i) - p.dpsi(x * x) * x).abs()
        })
        .fold(0.0, f64::max)
}

/// Box profile of total power `rho`: `sqrt(rho/(2m+1))` on `|j| <= m`
/// (on-site), or `sqrt(rho/(2m))` on `|j| <= m - 1/2` (inter-site, `m >= 1`).
pub fn box_profile(scheme: IndexScheme, rho: f64, m: usize) -> Result<Profile> {
    let (count, reach) = match scheme {
        IndexScheme::OnSite => (2 * m + 1, m as f64),
        IndexScheme::InterSite => {
            if m == 0 {
                return Err(Error::InvalidConfig("inter-site box profiles need m >= 1".into()));
            }
            (2 * m, m as f64 - 0.5)
        }
    };
    let cell = Cell::truncated(scheme, reach + 1.0)?;
    let level = (rho / count as f64).sqrt();
    Profile::from_fn(cell, |j| if j.abs() <= reach { level } else { 0.0 })
}

/// Exponential profile `A e^{-ζ|j|}` normalized to power `rho` on the
/// infinite lattice (`A² = rho tanh ζ` on-site, `rho sinh ζ` inter-site),
/// truncated at `J_max = max(50, 20/ζ)`.
pub fn exponential_profile(scheme: IndexScheme, rho: f64, zeta: f64) -> Result<Profile> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidConfig(format!("zeta must be positive, got {zeta}")));
    }
    let amp_sq = match scheme {
        IndexScheme::OnSite => rho * zeta.tanh(),
        IndexScheme::InterSite => rho * zeta.sinh(),
    };
    let j_max = (20.0 / zeta).max(50.0);
    let cell = Cell::truncated(scheme, j_max)?;
    let amp = amp_sq.sqrt();
    Profile::from_fn(cell, |j| amp * (-zeta * j.abs()).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestProfileValue {
    /// `m` for box profiles, `ζ` for exponential ones.
    pub parameter: f64,
    pub coupling: f64,
    pub t_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TLowerBounds {
    pub best: f64,
    pub boxes: Vec<TestProfileValue>,
    pub exponentials: Vec<TestProfileValue>,
}

/// Lower bound for `T_∞(α, ρ)` from box and exponential test profiles.
pub fn t_lower_bounds(
    p: &Potential,
    scheme: IndexScheme,
    alpha: f64,
    rho: f64,
    m_max: usize,
    zeta_grid: &[f64],
) -> Result<TLowerBounds> {
    check_alpha(alpha)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidConfig(format!("rho must be positive, got {rho}")));
    }
    let evaluate = |parameter: f64, u: Profile| -> Result<TestProfileValue> {
        let e = energy(&u, p, alpha)?;
        Ok(TestProfileValue { parameter, coupling: e.coupling, t_value: e.p_total / (alpha * rho) })
    };
    let first_m = match scheme {
        IndexScheme::OnSite => 0,
        IndexScheme::InterSite => 1,
    };
    let boxes = (first_m..=m_max.max(first_m))
        .map(|m| evaluate(m as f64, box_profile(scheme, rho, m)?))
        .collect::<Result<Vec<_>>>()?;
    let exponentials =
        zeta_grid.iter().map(|&z| evaluate(z, exponential_profile(scheme, rho, z)?)).collect::<Result<Vec<_>>>()?;
    let best = boxes.iter().chain(&exponentials).map(|v| v.t_value).fold(f64::NEG_INFINITY, f64::max);
    Ok(TLowerBounds { best, boxes, exponentials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn onsite(n: usize) -> Cell {
        Cell::periodic(IndexScheme::OnSite, n).unwrap()
    }

    #[test]
    fn power_examples() {
        assert_eq!(power(&Profile::zeros(onsite(4))), 0.0);
        let u = Profile::new(onsite(3), vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(power(&u), 6.0);
        assert_eq!(power(&crate::lattice::stagger(&u)), 6.0);
    }

    #[test]
    fn coupling_of_constant_profile() {
        let u = Profile::new(onsite(4), vec![1.0; 4]).unwrap();
        assert_eq!(coupling(&u), 8.0);
    }

    #[test]
    fn quartic_breakdown_by_hand() {
        let u = Profile::new(onsite(4), vec![1.0; 4]).unwrap();
        let e = energy(&u, &Potential::Quartic, 1.0).unwrap();
        assert_eq!(e.power, 4.0);
        assert_eq!(e.coupling, 8.0);
        assert_eq!(e.potential_energy, 4.0);
        assert_eq!(e.p_total, 12.0);
        assert_eq!(e.t_value, Some(3.0));
        assert_eq!(e.hamiltonian, -4.0);
        let two = Profile::new(Cell::periodic(IndexScheme::InterSite, 2).unwrap(), vec![1.0, 1.0]).unwrap();
        assert_eq!(potential_energy(&two, &Potential::Quartic), 2.0);
    }

    #[test]
    fn zero_profile_has_no_t_value() {
        let e = energy(&Profile::zeros(onsite(5)), &Potential::Quartic, 1.0).unwrap();
        assert_eq!(e.t_value, None);
        assert!(sigma(&Profile::zeros(onsite(5)), &Potential::Quartic, 1.0).is_err());
        assert!(energy(&Profile::zeros(onsite(5)), &Potential::Quartic, 0.0).is_err());
    }

    #[test]
    fn constant_profile_energy_and_t() {
        let (alpha, rho) = (0.7, 3.0);
        for n in [2usize, 5, 17, 64] {
            let u = Profile::constant(onsite(n), rho);
            for p in Potential::catalog() {
                let e = energy(&u, &p, alpha).unwrap();
                let expected = 2.0 * alpha * rho + n as f64 * p.psi(rho / n as f64);
                assert_relative_eq!(e.p_total, expected, max_relative = 1e-13);
                assert!(e.t_value.unwrap() > 2.0, "{p} N={n}");
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let (alpha, rho) = (1.3, 2.0f64);
        let p = Potential::SaturableLog;
        let cell = Cell::truncated(IndexScheme::OnSite, 4.0).unwrap();
        let single = Profile::from_fn(cell, |j| if j == 0.0 { rho.sqrt() } else { 0.0 }).unwrap();
        assert_relative_eq!(sigma(&single, &p, alpha).unwrap(), 2.0 * p.dpsi(rho), max_relative = 1e-14);
        let g = grad_p(&single, &p, alpha);
        assert_relative_eq!(g.at(0.0), 2.0 * p.dpsi(rho) * rho.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g.at(1.0), 2.0 * alpha * rho.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g.at(-1.0), 2.0 * alpha * rho.sqrt(), max_relative = 1e-14);

        let n = 9;
        let c = Profile::constant(onsite(n), rho);
        let expected = 4.0 * alpha + 2.0 * p.dpsi(rho / n as f64);
        assert_relative_eq!(sigma(&c, &p, alpha).unwrap(), expected, max_relative = 1e-14);
        assert_eq!(sigma(&c.scaled(-1.0), &p, alpha).unwrap(), sigma(&c, &p, alpha).unwrap());
    }

    #[test]
    fn constant_profile_is_a_standing_wave() {
        let (alpha, rho, n) = (1.0, 5.0, 12);
        for p in Potential::catalog() {
            let u = Profile::constant(onsite(n), rho);
            let freq = 2.0 * alpha + p.dpsi(rho / n as f64);
            assert!(residual(&u, freq, &p, alpha) <= 1e-14, "{p}");
            assert_relative_eq!(frequency(&u, &p, alpha).unwrap(), freq, max_relative = 1e-14);
        }
        assert_eq!(residual(&Profile::zeros(onsite(4)), 3.0, &Potential::Quartic, 1.0), 0.0);
    }

    #[test]
    fn box_profile_closed_forms() {
        let rho = 2.5;
        for m in 0..8usize {
            let u = box_profile(IndexScheme::OnSite, rho, m).unwrap();
            assert_relative_eq!(power(&u), rho, max_relative = 1e-14);
            let expected = 4.0 * m as f64 / (2 * m + 1) as f64 * rho;
            assert_relative_eq!(coupling(&u), expected, max_relative = 1e-13, epsilon = 1e-15);
        }
        for m in 1..8usize {
            let v = box_profile(IndexScheme::InterSite, rho, m).unwrap();
            assert_relative_eq!(power(&v), rho, max_relative = 1e-14);
            let expected = (2 * m - 1) as f64 / m as f64 * rho;
            assert_relative_eq!(coupling(&v), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn exponential_profile_closed_forms() {
        let rho = 1.7;
        for zeta in [0.05, 0.3, 1.0, 2.5] {
            let u = exponential_profile(IndexScheme::OnSite, rho, zeta).unwrap();
            assert_relative_eq!(power(&u), rho, max_relative = 1e-12);
            assert_relative_eq!(coupling(&u), 2.0 * rho / zeta.cosh(), max_relative = 1e-10);
            // inter-site: L = rho (1 - e^{-2ζ} + 2 e^{-ζ})
            let v = exponential_profile(IndexScheme::InterSite, rho, zeta).unwrap();
            assert_relative_eq!(power(&v), rho, max_relative = 1e-12);
            let expected = rho * (1.0 - (-2.0 * zeta).exp() + 2.0 * (-zeta).exp());
            assert_relative_eq!(coupling(&v), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let grid = [0.05, 0.1, 0.2, 0.5, 1.0];
        let b = t_lower_bounds(&Potential::Quartic, IndexScheme::OnSite, 0.5, 2.0, 10, &grid).unwrap();
        assert!(b.best > 2.0);
        for (alpha, rho) in [(1.0, 0.1), (3.0, 0.5), (10.0, 1e-3)] {
            for p in Potential::catalog() {
                let m_max = 6;
                let b = t_lower_bounds(&p, IndexScheme::OnSite, alpha, rho, m_max, &grid).unwrap();
                assert!(b.best >= 2.0 - 2.0 / (2 * m_max + 1) as f64, "{p}");
            }
        }
        let mut last = f64::NEG_INFINITY;
        for rho in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let b = t_lower_bounds(&Potential::ExpQuadratic, IndexScheme::InterSite, 1.0, rho, 12, &grid).unwrap();
            assert!(b.best >= last);
            last = b.best;
        }
    }

    #[test]
    fn increment_matches_direct_difference() {
        let cell = Cell::periodic(IndexScheme::OnSite, 9).unwrap();
        let u = Profile::from_fn(cell, |j| (-0.4 * j.abs()).exp()).unwrap();
        let v = Profile::from_fn(cell, |j| 1.1 * (-0.5 * j.abs()).exp() + 0.01).unwrap();
        for p in Potential::catalog() {
            let direct = p_total(&v, &p, 0.7) - p_total(&u, &p, 0.7);
            let inc = p_increment(&u, &v, &p, 0.7);
            assert!((inc - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{p}");
        }
    }

    #[test]
    fn increment_resolves_tiny_steps() {
        // P(u + h e) - P(u) ≈ h <∂P(u), e> far below the rounding level of P
        let cell = Cell::periodic(IndexScheme::InterSite, 12).unwrap();
        let p = Potential::SaturableArctan;
        let u = Profile::from_fn(cell, |j| 2.0 * (-0.6 * j.abs()).exp()).unwrap();
        let e = Profile::from_fn(cell, |j| (0.3 * j).cos()).unwrap();
        let slope = grad_p(&u, &p, 1.0).dot(&e);
        for h in [1e-8, 1e-11, 1e-14] {
            let v = Profile::from_fn(cell, |j| u.at(j) + h * e.at(j)).unwrap();
            let actual: Vec<f64> = v.values().iter().zip(u.values()).map(|(b, a)| b - a).collect();
            let d = Profile::new(cell, actual).unwrap();
            let expected = grad_p(&u, &p, 1.0).dot(&d);
            let inc = p_increment(&u, &v, &p, 1.0);
            assert!((inc - expected).abs() <= 1e-6 * expected.abs(), "h={h}: {inc} vs {expected} ({slope})");
        }
    }
}
