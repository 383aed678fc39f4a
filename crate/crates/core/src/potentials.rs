//! On-site nonlinear potentials `Ψ` and numerical checks of the growth
//! conditions the existence theory relies on.
//!
//! Every potential is evaluated on `x = |A|^2 >= 0`. The catalog entries
//! satisfy `Ψ(0) = Ψ'(0) = 0`, `Ψ >= 0` and the super-linear growth
//! `x Ψ'(x) >= Ψ(x)`; user-defined potentials can be checked on a sample
//! grid with [`check_assumptions`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed on every inequality in [`check_assumptions`].
pub const ASSUMPTION_SLACK: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied potential given as a `(Ψ, Ψ')` pair.
#[derive(Clone)]
pub struct CustomPotential {
    pub name: String,
    psi: ScalarFn,
    dpsi: ScalarFn,
    /// Whether `Ψ` is declared continuously differentiable on `(0, ∞)`.
    /// Only smooth potentials are subjected to the finite-difference check.
    pub smooth: bool,
}

impl CustomPotential {
    pub fn new<F, G>(name: impl Into<String>, psi: F, dpsi: G, smooth: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CustomPotential { name: name.into(), psi: Arc::new(psi), dpsi: Arc::new(dpsi), smooth }
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("name", &self.name).field("smooth", &self.smooth).finish()
    }
}

/// Catalog of nonlinear potentials.
#[derive(Clone, Debug)]
pub enum Potential {
    /// `Ψ(x) = c x^{1+η} / (1+η)`, `Ψ'(x) = c x^η`.
    Power {
        eta: f64,
        c: f64,
    },
    /// `Ψ(x) = x - ln(1+x)`, saturable derivative `x / (1+x)`.
    SaturableLog,
    /// `Ψ(x) = x - arctan x`, saturable derivative `x^2 / (1+x^2)`.
    SaturableArctan,
    /// `Ψ(x) = e^x - x^2/2 - x - 1`.
    ExpQuadratic,
    /// `Ψ(x) = x^3 / (1+x^2)`, not convex but super-linear.
    NonConvexRational,
    /// `Ψ(x) = x^4`.
    Quartic,
    Custom(CustomPotential),
}

/// Discriminant of [`Potential`], used in reports and serialized output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Power,
    SaturableLog,
    SaturableArctan,
    ExpQuadratic,
    NonConvexRational,
    Quartic,
    Custom,
}

impl Potential {
    pub fn power(eta: f64, c: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("power exponent eta must be positive, got {eta}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("power scale c must be positive, got {c}")));
        }
        Ok(Potential::Power { eta, c })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Power { .. } => PotentialKind::Power,
            Potential::SaturableLog => PotentialKind::SaturableLog,
            Potential::SaturableArctan => PotentialKind::SaturableArctan,
            Potential::ExpQuadratic => PotentialKind::ExpQuadratic,
            Potential::NonConvexRational => PotentialKind::NonConvexRational,
            Potential::Quartic => PotentialKind::Quartic,
            Potential::Custom(_) => PotentialKind::Custom,
        }
    }

    /// All built-in potentials with default parameters (cubic power law).
    pub fn catalog() -> Vec<Potential> {
        vec![
            Potential::Power { eta: 1.0, c: 1.0 },
            Potential::SaturableLog,
            Potential::SaturableArctan,
            Potential::ExpQuadratic,
            Potential::NonConvexRational,
            Potential::Quartic,
        ]
    }

    /// `Ψ(x)` with a domain check.
    pub fn eval_psi(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(x));
        }
        Ok(self.psi(x))
    }

    /// `Ψ'(x)` with a domain check.
    pub fn eval_dpsi(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(x));
        }
        Ok(self.dpsi(x))
    }

    /// Unchecked `Ψ(x)`; callers guarantee `x >= 0` (typically `x = u^2`).
    #[inline]
    pub fn psi(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0, "psi evaluated at negative x = {x}");
        match self {
            Potential::Power { eta, c } => c * x.powf(1.0 + eta) / (1.0 + eta),
            Potential::SaturableLog => {
                if x < 1e-2 {
                    // x - ln(1+x) = sum_{k>=2} (-1)^k x^k / k
                    alternating_series(x, 2, |k| 1.0 / k as f64)
                } else {
                    x - x.ln_1p()
                }
            }
            Potential::SaturableArctan => {
                if x < 1e-2 {
                    // x - atan x = x^3/3 - x^5/5 + ...
                    let x2 = x * x;
                    let mut term = x * x2;
                    let mut sum = 0.0;
                    for k in 0..12 {
                        let t = term / (2 * k + 3) as f64;
                        sum += if k % 2 == 0 { t } else { -t };
                        term *= x2;
                    }
                    sum
                } else {
                    x - x.atan()
                }
            }
            Potential::ExpQuadratic => {
                if x < 0.5 {
                    exp_tail(x, 3)
                } else {
                    // the three subtractions cancel; carry their rounding errors
                    let half_sq = 0.5 * x * x;
                    let half_sq_lo = (0.5 * x).mul_add(x, -half_sq);
                    let (s1, e1) = two_sum(x.exp_m1(), -x);
                    let (s2, e2) = two_sum(s1, -half_sq);
                    s2 + (e1 + e2 - half_sq_lo)
                }
            }
            Potential::NonConvexRational => x * x * x / (1.0 + x * x),
            Potential::Quartic => {
                let x2 = x * x;
                x2 * x2
            }
            Potential::Custom(c) => (c.psi)(x),
        }
    }

    /// Unchecked `Ψ'(x)`.
    #[inline]
    pub fn dpsi(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0, "dpsi evaluated at negative x = {x}");
        match self {
            Potential::Power { eta, c } => c * x.powf(*eta),
            Potential::SaturableLog => x / (1.0 + x),
            Potential::SaturableArctan => x * x / (1.0 + x * x),
            Potential::ExpQuadratic => {
                if x < 0.5 {
                    exp_tail(x, 2)
                } else {
                    x.exp_m1() - x
                }
            }
            Potential::NonConvexRational => {
                let x2 = x * x;
                let d = 1.0 + x2;
                x2 * (3.0 + x2) / (d * d)
            }
            Potential::Quartic => 4.0 * x * x * x,
            Potential::Custom(c) => (c.dpsi)(x),
        }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `sum_{k >= first} x^k / k!`, the tail of the exponential series.
fn exp_tail(x: f64, first: u32) -> f64 {
    let mut term = 1.0;
    for k in 1..=first {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = first;
    while k < first + 30 {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

fn alternating_series(x: f64, first: i32, coeff: impl Fn(i32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = x.powi(first);
    for k in first..first + 20 {
        let t = coeff(k) * pow;
        sum += if (k - first) % 2 == 0 { t } else { -t };
        pow *= x;
    }
    sum
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Power { eta, c } => write!(f, "power:eta={eta},c={c}"),
            Potential::SaturableLog => f.write_str("saturable-log"),
            Potential::SaturableArctan => f.write_str("saturable-arctan"),
            Potential::ExpQuadratic => f.write_str("exp-quadratic"),
            Potential::NonConvexRational => f.write_str("nonconvex-rational"),
            Potential::Quartic => f.write_str("quartic"),
            Potential::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "saturable-log" => return Ok(Potential::SaturableLog),
            "saturable-arctan" => return Ok(Potential::SaturableArctan),
            "exp-quadratic" => return Ok(Potential::ExpQuadratic),
            "nonconvex-rational" => return Ok(Potential::NonConvexRational),
            "quartic" => return Ok(Potential::Quartic),
            _ => {}
        }
        let params = if s == "power" {
            ""
        } else if let Some(rest) = s.strip_prefix("power:") {
            rest
        } else {
            return Err(Error::Parse(format!(
                "unknown potential '{s}' (expected power:eta=<r>,c=<r>, saturable-log, \
                 saturable-arctan, exp-quadratic, nonconvex-rational or quartic)"
            )));
        };
        let mut eta = None;
        let mut c = 1.0;
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| Error::Parse(format!("malformed power parameter '{item}'")))?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Parse(format!("invalid number in '{item}'")))?;
            match key.trim() {
                "eta" => eta = Some(value),
                "c" => c = value,
                other => return Err(Error::Parse(format!("unknown power parameter '{other}'"))),
            }
        }
        let eta = eta.ok_or_else(|| Error::Parse("power potential requires eta=<r>".into()))?;
        Potential::power(eta, c)
    }
}

impl Serialize for Potential {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which growth condition a sample point violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionCheck {
    /// `Ψ(0) = Ψ'(0) = 0`.
    Normalization,
    /// `x Ψ'(x) >= Ψ(x)`.
    SuperLinearity,
    /// `Ψ(x) >= 0`.
    NonNegativity,
    /// `Ψ(x) > 0` for `x > 0`.
    NonDegeneracy,
    /// Central difference of `Ψ` agrees with `Ψ'`.
    DerivativeConsistency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: f64,
    pub check: AssumptionCheck,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub geometric_points: usize,
    pub uniform_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub grid: SampleGrid,
}

const GRID_X_MIN: f64 = 1e-8;
const FD_X_MIN: f64 = 1e-4;
const FD_REL_STEP: f64 = 1e-4;
const FD_REL_TOL: f64 = 1e-6;

fn sample_grid(x_max: f64, samples: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(2 * samples);
    let lo = GRID_X_MIN.min(x_max).ln();
    let hi = x_max.ln();
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        xs.push((lo + t * (hi - lo)).exp());
    }
    for k in 1..=samples {
        xs.push(x_max * k as f64 / samples as f64);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Evaluates the normalization, growth, sign and derivative-consistency
/// conditions on a geometric-plus-uniform grid over `(0, x_max]`.
pub fn check_assumptions(p: &Potential, x_max: f64, samples: usize) -> Result<AssumptionReport> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidConfig(format!("x_max must be positive, got {x_max}")));
    }
    if samples < 2 {
        return Err(Error::InvalidConfig(format!("samples must be >= 2, got {samples}")));
    }

    let mut violations = Vec::new();
    let psi0 = p.psi(0.0);
    let dpsi0 = p.dpsi(0.0);
    if !(psi0.abs() <= ASSUMPTION_SLACK) {
        violations.push(Violation { x: 0.0, check: AssumptionCheck::Normalization, lhs: psi0, rhs: 0.0 });
    }
    if !(dpsi0.abs() <= ASSUMPTION_SLACK) {
        violations.push(Violation { x: 0.0, check: AssumptionCheck::Normalization, lhs: dpsi0, rhs: 0.0 });
    }

    let check_fd = match p {
        Potential::Custom(c) => c.smooth,
        _ => true,
    };

    for x in sample_grid(x_max, samples) {
        let psi = p.psi(x);
        let dpsi = p.dpsi(x);
        let lhs = x * dpsi;
        if !(lhs - psi >= -ASSUMPTION_SLACK) {
            violations.push(Violation { x, check: AssumptionCheck::SuperLinearity, lhs, rhs: psi });
        }
        if !(psi >= -ASSUMPTION_SLACK) {
            violations.push(Violation { x, check: AssumptionCheck::NonNegativity, lhs: psi, rhs: 0.0 });
        }
        if !(psi > 0.0) {
            violations.push(Violation { x, check: AssumptionCheck::NonDegeneracy, lhs: psi, rhs: 0.0 });
        }
        if check_fd && x >= FD_X_MIN {
            let h = FD_REL_STEP * x;
            let central = |h: f64| (p.psi(x + h) - p.psi(x - h)) / (2.0 * h);
            // Richardson step removes the O(h²) term
            let fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
            let tol = FD_REL_TOL * dpsi.abs() + 16.0 * f64::EPSILON * psi.abs() / h;
            if !((fd - dpsi).abs() <= tol) {
                violations.push(Violation { x, check: AssumptionCheck::DerivativeConsistency, lhs: fd, rhs: dpsi });
            }
        }
    }

    Ok(AssumptionReport {
        passed: violations.is_empty(),
        violations,
        grid: SampleGrid { x_min: GRID_X_MIN.min(x_max), x_max, geometric_points: samples, uniform_points: samples },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psi_examples() {
        let cubic = Potential::power(1.0, 1.0).unwrap();
        assert_eq!(cubic.eval_psi(2.0).unwrap(), 2.0);
        assert_relative_eq!(Potential::SaturableLog.eval_psi(1.0).unwrap(), 1.0 - 2f64.ln(), epsilon = 1e-15);
        assert_eq!(Potential::SaturableArctan.eval_psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn dpsi_examples() {
        let p = Potential::power(2.0, 1.0).unwrap();
        assert_relative_eq!(p.eval_dpsi(3.0).unwrap(), 9.0, epsilon = 1e-14);
        assert_eq!(Potential::SaturableLog.eval_dpsi(1.0).unwrap(), 0.5);
        assert_eq!(Potential::NonConvexRational.eval_dpsi(1.0).unwrap(), 1.0);
        assert_eq!(Potential::Quartic.eval_dpsi(2.0).unwrap(), 32.0);
        assert_relative_eq!(Potential::ExpQuadratic.eval_dpsi(1.0).unwrap(), 1f64.exp() - 2.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_argument_is_a_domain_error() {
        for p in Potential::catalog() {
            assert_eq!(p.eval_psi(-1.0), Err(Error::Domain(-1.0)));
            assert_eq!(p.eval_dpsi(-0.5), Err(Error::Domain(-0.5)));
        }
    }

    #[test]
    fn normalized_at_zero() {
        for p in Potential::catalog() {
            assert_eq!(p.psi(0.0), 0.0, "{p}");
            assert_eq!(p.dpsi(0.0), 0.0, "{p}");
        }
    }

    #[test]
    fn series_branches_match_closed_forms() {
        // Both branches are evaluated at the switch point and just above it.
        for x in [9.9e-3, 1.01e-2, 0.3] {
            assert_relative_eq!(Potential::SaturableLog.psi(x), x - x.ln_1p(), max_relative = 1e-9);
            assert_relative_eq!(Potential::SaturableArctan.psi(x), x - x.atan(), max_relative = 1e-9);
        }
        for x in [0.1f64, 0.49, 0.51] {
            let direct = x.exp() - 0.5 * x * x - x - 1.0;
            assert_relative_eq!(Potential::ExpQuadratic.psi(x), direct, max_relative = 1e-9);
            assert_relative_eq!(Potential::ExpQuadratic.dpsi(x), x.exp() - x - 1.0, max_relative = 1e-9);
        }
        // Small-x leading orders.
        assert_relative_eq!(Potential::ExpQuadratic.psi(1e-6), 1e-18 / 6.0, max_relative = 1e-5);
        assert_relative_eq!(Potential::SaturableArctan.psi(1e-6), 1e-18 / 3.0, max_relative = 1e-5);
    }

    #[test]
    fn catalog_passes_assumptions() {
        for p in Potential::catalog() {
            let report = check_assumptions(&p, 100.0, 1000).unwrap();
            assert!(report.passed, "{p}: {:?}", &report.violations[..report.violations.len().min(3)]);
        }
    }

    #[test]
    fn sqrt_potential_fails_near_zero() {
        let p = Potential::Custom(CustomPotential::new("sqrt", f64::sqrt, |x: f64| 0.5 / x.sqrt(), true));
        let report = check_assumptions(&p, 10.0, 200).unwrap();
        assert!(!report.passed);
        let has = |c| report.violations.iter().any(|v| v.check == c);
        assert!(has(AssumptionCheck::Normalization));
        assert!(has(AssumptionCheck::SuperLinearity));
        assert!(report.violations.iter().filter(|v| v.check == AssumptionCheck::SuperLinearity).any(|v| v.x < 1e-4));
    }

    #[test]
    fn inconsistent_pair_is_caught() {
        // Ψ' off by a factor of two.
        let p = Potential::Custom(CustomPotential::new("bad", |x: f64| x * x, |x: f64| x, true));
        let report = check_assumptions(&p, 10.0, 50).unwrap();
        assert!(report.violations.iter().any(|v| v.check == AssumptionCheck::DerivativeConsistency));
    }

    #[test]
    fn parameter_validation() {
        assert!(check_assumptions(&Potential::Quartic, 0.0, 10).is_err());
        assert!(check_assumptions(&Potential::Quartic, 1.0, 1).is_err());
        assert!(Potential::power(0.0, 1.0).is_err());
        assert!(Potential::power(1.0, -1.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in Potential::catalog() {
            let back: Potential = p.to_string().parse().unwrap();
            assert_eq!(back.to_string(), p.to_string());
        }
        let p: Potential = "power:eta=0.5,c=2".parse().unwrap();
        assert!(matches!(p, Potential::Power { eta, c } if eta == 0.5 && c == 2.0));
        let p: Potential = "power:eta=3".parse().unwrap();
        assert!(matches!(p, Potential::Power { c, .. } if c == 1.0));
        assert!("cubic".parse::<Potential>().is_err());
        assert!("power:c=1".parse::<Potential>().is_err());
    }
}
