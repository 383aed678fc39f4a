//! Index schemes, periodicity cells and profiles.
//!
//! Lattice indices are integers (on-site) or half-integers (inter-site).
//! Both are stored as the doubled integer `2j`, so on-site indices are even
//! and inter-site indices are odd.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexScheme {
    /// `j ∈ ℤ`; waves peak on a site.
    OnSite,
    /// `j ∈ ℤ + 1/2`; waves peak on a bond.
    InterSite,
}

impl IndexScheme {
    fn parity(self) -> i64 {
        match self {
            IndexScheme::OnSite => 0,
            IndexScheme::InterSite => 1,
        }
    }
}

impl fmt::Display for IndexScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexScheme::OnSite => "onsite",
            IndexScheme::InterSite => "intersite",
        })
    }
}

impl std::str::FromStr for IndexScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "onsite" => Ok(IndexScheme::OnSite),
            "intersite" => Ok(IndexScheme::InterSite),
            _ => Err(Error::Parse(format!("unknown index scheme '{s}' (onsite|intersite)"))),
        }
    }
}

/// Extent and boundary convention of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellSize {
    /// Periodicity cell `Z_N` with periodic wrap.
    Periodic(usize),
    /// Truncated infinite lattice `|j| <= J_max`, zero beyond.
    Truncated { max_doubled: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    scheme: IndexScheme,
    size: CellSize,
}

impl Cell {
    /// Periodicity cell `Z_N`.
    pub fn periodic(scheme: IndexScheme, n: usize) -> Result<Cell> {
        if n == 0 {
            return Err(Error::InvalidConfig("N must be ≥ 1".into()));
        }
        Ok(Cell { scheme, size: CellSize::Periodic(n) })
    }

    /// Truncated infinite lattice holding every index with `|j| <= j_max`.
    pub fn truncated(scheme: IndexScheme, j_max: f64) -> Result<Cell> {
        if !(j_max.is_finite() && j_max >= 0.0) {
            return Err(Error::InvalidConfig(format!("J_max must be non-negative, got {j_max}")));
        }
        let mut max_doubled = (2.0 * j_max).floor() as i64;
        if max_doubled.rem_euclid(2) != scheme.parity() {
            max_doubled -= 1;
        }
        if max_doubled < 0 {
            return Err(Error::InvalidConfig(format!("J_max = {j_max} holds no {scheme} index")));
        }
        Ok(Cell { scheme, size: CellSize::Truncated { max_doubled } })
    }

    pub fn scheme(&self) -> IndexScheme {
        self.scheme
    }

    pub fn size(&self) -> CellSize {
        self.size
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.size, CellSize::Periodic(_))
    }

    /// Periodicity length, `None` for truncated cells.
    pub fn period(&self) -> Option<usize> {
        match self.size {
            CellSize::Periodic(n) => Some(n),
            CellSize::Truncated { .. } => None,
        }
    }

    /// Largest `|j|` held by a truncated cell.
    pub fn j_max(&self) -> Option<f64> {
        match self.size {
            CellSize::Periodic(_) => None,
            CellSize::Truncated { max_doubled } => Some(max_doubled as f64 / 2.0),
        }
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        match self.size {
            CellSize::Periodic(n) => n,
            CellSize::Truncated { max_doubled } => (max_doubled + 1) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest doubled index of the cell.
    pub fn min_doubled(&self) -> i64 {
        match (self.size, self.scheme) {
            (CellSize::Truncated { max_doubled }, _) => -max_doubled,
            // Z_{2M} = {-M+1..M}, Z_{2M+1} = {-M..M}
            (CellSize::Periodic(n), IndexScheme::OnSite) => -2 * ((n as i64 - 1) / 2),
            // Z_{2M} = {-M+1/2..M-1/2}, Z_{2M+1} = {-M+1/2..M+1/2}
            (CellSize::Periodic(n), IndexScheme::InterSite) => -2 * (n as i64 / 2) + 1,
        }
    }

    pub fn max_doubled(&self) -> i64 {
        self.min_doubled() + 2 * (self.len() as i64 - 1)
    }

    #[inline]
    pub fn doubled_index(&self, pos: usize) -> i64 {
        self.min_doubled() + 2 * pos as i64
    }

    #[inline]
    pub fn index(&self, pos: usize) -> f64 {
        self.doubled_index(pos) as f64 / 2.0
    }

    /// Position of doubled index `d` in the value vector.
    pub fn position(&self, d: i64) -> Option<usize> {
        let offset = d - self.min_doubled();
        if offset < 0 || offset % 2 != 0 {
            return None;
        }
        let pos = (offset / 2) as usize;
        (pos < self.len()).then_some(pos)
    }

    /// Whether `d` lies in the symmetrized cell `Z̃ = Z ∩ (-Z)`.
    pub fn in_symmetrized(&self, d: i64) -> bool {
        self.position(d).is_some() && self.position(-d).is_some()
    }

    /// The ordered index list `Z_N` (or the truncation window).
    pub fn indices(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.index(p)).collect()
    }

    pub fn doubled_indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(move |p| self.doubled_index(p))
    }

    /// Sum of the two neighbour values of site `pos` under the cell's
    /// boundary convention.
    #[inline]
    pub fn neighbor_sum(&self, values: &[f64], pos: usize) -> f64 {
        let n = values.len();
        match self.size {
            CellSize::Periodic(_) => values[(pos + 1) % n] + values[(pos + n - 1) % n],
            CellSize::Truncated { .. } => {
                let right = if pos + 1 < n { values[pos + 1] } else { 0.0 };
                let left = if pos > 0 { values[pos - 1] } else { 0.0 };
                right + left
            }
        }
    }

    /// Orbits of the reflection `j -> -j` on the non-negative half, ordered
    /// by increasing `|j|`: `(position of j >= 0, position of -j if distinct)`.
    pub fn orbits(&self) -> Vec<(usize, Option<usize>)> {
        self.doubled_indices()
            .filter(|&d| d >= 0)
            .map(|d| {
                let pos = self.position(d).expect("index from cell");
                let mirror = if d == 0 { None } else { self.position(-d) };
                (pos, mirror)
            })
            .collect()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.size {
            CellSize::Periodic(n) => write!(f, "{} N={}", self.scheme, n),
            CellSize::Truncated { max_doubled } => {
                write!(f, "{} |j|<={}", self.scheme, max_doubled as f64 / 2.0)
            }
        }
    }
}

/// `Z_N` for a periodic cell.
pub fn cell_indices(cell: &Cell) -> Result<Vec<f64>> {
    if !cell.is_periodic() {
        return Err(Error::InfiniteCell);
    }
    Ok(cell.indices())
}

/// A real lattice profile aligned with a cell's index list.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    cell: Cell,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(cell: Cell, values: Vec<f64>) -> Result<Profile> {
        if values.len() != cell.len() {
            return Err(Error::LengthMismatch { values: values.len(), expected: cell.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateProfile("non-finite value"));
        }
        Ok(Profile { cell, values })
    }

    pub fn zeros(cell: Cell) -> Profile {
        Profile { cell, values: vec![0.0; cell.len()] }
    }

    /// Builds a profile by evaluating `f` at every index `j`.
    pub fn from_fn(cell: Cell, mut f: impl FnMut(f64) -> f64) -> Result<Profile> {
        let values = (0..cell.len()).map(|p| f(cell.index(p))).collect();
        Profile::new(cell, values)
    }

    /// The constant profile `sqrt(rho / N)` on a periodic cell.
    pub fn constant(cell: Cell, rho: f64) -> Profile {
        let c = (rho / cell.len() as f64).sqrt();
        Profile { cell, values: vec![c; cell.len()] }
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at index `j`, zero outside the cell.
    pub fn at(&self, j: f64) -> f64 {
        let d = (2.0 * j).round() as i64;
        self.cell.position(d).map_or(0.0, |p| self.values[p])
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Positions attaining the maximum value.
    pub fn argmax(&self) -> Vec<usize> {
        let m = self.max_value();
        (0..self.len()).filter(|&p| self.values[p] == m).collect()
    }

    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        Profile { cell: self.cell, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Rescales to `||u||^2 = rho`.
    pub fn normalized(&self, rho: f64) -> Result<Profile> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::DegenerateProfile("zero norm"));
        }
        Ok(self.scaled(rho.sqrt() / n))
    }

    pub fn dot(&self, other: &Profile) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

/// Membership in the cone of non-negative, even, unimodal profiles, with
/// absolute slack `tol`.
pub fn in_cone(u: &Profile, tol: f64) -> bool {
    let cell = u.cell();
    let v = u.values();
    for (pos, d) in cell.doubled_indices().enumerate() {
        if v[pos] < -tol {
            return false;
        }
        if let Some(mirror) = cell.position(-d) {
            if (v[pos] - v[mirror]).abs() > tol {
                return false;
            }
        }
        // u_{j-1} >= u_j for all j >= 1
        if d >= 2 {
            let prev = cell.position(d - 2).expect("j-1 lies in the cell");
            if v[prev] < v[pos] - tol {
                return false;
            }
        }
    }
    true
}

/// Euclidean projection onto the cone: symmetrize, weighted isotonic
/// regression on `|j|`, then clip at zero.
pub fn project_cone(u: &Profile) -> Profile {
    let cell = *u.cell();
    let v = u.values();
    let orbits = cell.orbits();
    let mut means = Vec::with_capacity(orbits.len());
    let mut weights = Vec::with_capacity(orbits.len());
    for &(pos, mirror) in &orbits {
        match mirror {
            Some(m) => {
                means.push(0.5 * (v[pos] + v[m]));
                weights.push(2.0);
            }
            None => {
                means.push(v[pos]);
                weights.push(1.0);
            }
        }
    }
    let fit = isotonic::decreasing_fit(&means, &weights);
    let mut out = vec![0.0; cell.len()];
    for (&(pos, mirror), value) in orbits.iter().zip(fit) {
        let value = value.max(0.0);
        out[pos] = value;
        if let Some(m) = mirror {
            out[m] = value;
        }
    }
    Profile { cell, values: out }
}

/// The restriction `R_N`: keep values on the symmetrized source cell, zero
/// elsewhere, and read them off on `target`.
pub fn restrict(u: &Profile, target: &Cell) -> Result<Profile> {
    let source = u.cell();
    if source.scheme() != target.scheme() {
        return Err(Error::SchemeMismatch(source.scheme(), target.scheme()));
    }
    let values = target
        .doubled_indices()
        .map(|d| if source.in_symmetrized(d) { u.values()[source.position(d).unwrap()] } else { 0.0 })
        .collect();
    Ok(Profile { cell: *target, values })
}

/// The embedding `E_N`: the periodic continuation of the restriction of
/// `u` to the symmetrized target cell.
pub fn embed(u: &Profile, target: &Cell) -> Result<Profile> {
    let source = u.cell();
    if source.scheme() != target.scheme() {
        return Err(Error::SchemeMismatch(source.scheme(), target.scheme()));
    }
    if !target.is_periodic() {
        return Err(Error::InfiniteCell);
    }
    let values = target
        .doubled_indices()
        .map(|d| match source.position(d) {
            Some(p) if target.in_symmetrized(d) && source.in_symmetrized(d) => u.values()[p],
            _ => 0.0,
        })
        .collect();
    Ok(Profile { cell: *target, values })
}

/// Sign alternation `u_j -> (-1)^j u_j` (inter-site: `(-1)^{j-1/2}`).
pub fn stagger(u: &Profile) -> Profile {
    let cell = *u.cell();
    let values = cell
        .doubled_indices()
        .zip(u.values())
        .map(|(d, &v)| {
            let exponent = match cell.scheme() {
                IndexScheme::OnSite => d / 2,
                IndexScheme::InterSite => (d - 1) / 2,
            };
            if exponent.rem_euclid(2) == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    Profile { cell, values }
}
