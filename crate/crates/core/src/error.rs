use thiserror::Error;

/// Errors produced by the lattice, functional, solver and evolution layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential evaluated outside its domain at x = {0} (requires x >= 0)")]
    Domain(f64),

    #[error("{0}")]
    InvalidConfig(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(&'static str),

    #[error("index schemes differ: {0:?} vs {1:?}")]
    SchemeMismatch(crate::lattice::IndexScheme, crate::lattice::IndexScheme),

    #[error("operation requires a finite periodicity cell")]
    InfiniteCell,

    #[error("profile has {values} values but the cell holds {expected} sites")]
    LengthMismatch { values: usize, expected: usize },

    #[error("tail too short for a decay fit: {points} points (need at least 4)")]
    TailTooShort { points: usize },

    #[error("frequency {sigma} does not exceed 2*alpha = {two_alpha}; profile is not localized")]
    NotLocalized { sigma: f64, two_alpha: f64 },

    #[error("integration blew up at t = {time}: |A_{site}| exceeded 1e6")]
    BlowUp { time: f64, site: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
