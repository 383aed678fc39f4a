//! Standing waves of focusing discrete nonlinear Schrödinger lattices
//!
//! ```text
//! i A_j' + α (A_{j+1} + A_{j-1}) + Ψ'(|A_j|²) A_j = 0
//! ```
//!
//! computed as maximizers of `P(u) = α Σ u_j (u_{j+1} + u_{j-1}) + Σ Ψ(u_j²)`
//! on the sphere `Σ u_j² = ρ`, restricted to even, non-negative profiles
//! that decrease away from the center.
//!
//! ```
//! use dnls_core::{solve, IndexScheme, Potential, SolverConfig};
//!
//! let cfg = SolverConfig::new(1.0, 10.0, IndexScheme::OnSite, 25);
//! let wave = solve(&cfg, &Potential::SaturableArctan).unwrap();
//! assert!(wave.converged);
//! assert!(wave.sigma > 2.0 * cfg.alpha);
//! ```

// NaN must fail every comparison below, hence `!(x <= y)` over `x > y`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod io;
pub mod isotonic;
pub mod lattice;
pub mod potentials;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use evolution::{
    check_relative_equilibrium, check_relative_equilibrium_observed, integrate, relative_equilibrium_check,
    EvolutionState, IntegrationDiagnostics, RelativeEquilibriumReport,
};
pub use functionals::{energy, EnergyBreakdown, TLowerBounds};
pub use lattice::{in_cone, project_cone, restrict, Cell, CellSize, IndexScheme, Profile};
pub use potentials::{check_assumptions, AssumptionReport, CustomPotential, Potential, PotentialKind};
pub use solver::{
    homoclinic, oracle_maximize, solve, solve_observed, ConeGuard, HomoclinicOptions, HomoclinicReport, SolverConfig,
    Termination, Verdict, WaveSolution,
};
pub use sweep::{sweep, SweepParam, SweepPoint};
