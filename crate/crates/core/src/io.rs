//! CSV and JSON artifacts.
//!
//! Every float is written with 17 significant digits, which round-trips any
//! `f64` exactly.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionState;
use crate::functionals::EnergyBreakdown;
use crate::lattice::{Cell, IndexScheme, Profile};
use crate::potentials::Potential;
use crate::solver::{DecayFit, SolverConfig, Termination, WaveSolution};

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A lattice index `d/2` in plain decimal: `-1`, `-0.5`, `0`, `2.5`.
pub fn fmt_index(doubled: i64) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{}", doubled as f64 / 2.0)
    }
}

pub fn write_profile_csv<W: Write>(u: &Profile, mut w: W) -> io::Result<()> {
    writeln!(w, "j,u")?;
    for (pos, v) in u.values().iter().enumerate() {
        writeln!(w, "{},{}", fmt_index(u.cell().doubled_index(pos)), fmt_f64(*v))?;
    }
    Ok(())
}

pub fn profile_csv_string(u: &Profile) -> String {
    let mut buf = Vec::new();
    write_profile_csv(u, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_rows(text: &str) -> Result<Vec<(i64, f64)>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some(h) if h.replace(' ', "") == "j,u" => {}
        other => return Err(Error::Parse(format!("expected header 'j,u', found {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let (j, u) =
                line.split_once(',').ok_or_else(|| Error::Parse(format!("row {}: expected two columns", k + 1)))?;
            let j: f64 = j.trim().parse().map_err(|e| Error::Parse(format!("row {}: index: {e}", k + 1)))?;
            let u: f64 = u.trim().parse().map_err(|e| Error::Parse(format!("row {}: value: {e}", k + 1)))?;
            let d = 2.0 * j;
            if d.fract() != 0.0 || !d.is_finite() {
                return Err(Error::Parse(format!("row {}: {j} is not an integer or half-integer", k + 1)));
            }
            Ok((d as i64, u))
        })
        .collect()
}

/// Reads a profile CSV onto `cell`; the indices must match the cell exactly.
pub fn parse_profile_csv_on(text: &str, cell: &Cell) -> Result<Profile> {
    let rows = parse_rows(text)?;
    if rows.len() != cell.len() {
        return Err(Error::LengthMismatch { values: rows.len(), expected: cell.len() });
    }
    for (pos, &(d, _)) in rows.iter().enumerate() {
        if cell.doubled_index(pos) != d {
            return Err(Error::Parse(format!(
                "row {}: index {} does not match the cell (expected {})",
                pos + 1,
                fmt_index(d),
                fmt_index(cell.doubled_index(pos))
            )));
        }
    }
    Profile::new(*cell, rows.into_iter().map(|(_, u)| u).collect())
}

/// Reads a profile CSV, inferring the cell.
///
/// The scheme follows from the index parity. Row counts and ranges that fit
/// a periodicity cell are read as periodic; otherwise a symmetric range is
/// read as a truncated cell.
pub fn parse_profile_csv(text: &str) -> Result<Profile> {
    let rows = parse_rows(text)?;
    let Some(&(first, _)) = rows.first() else {
        return Err(Error::Parse("profile has no rows".into()));
    };
    let scheme = if first.rem_euclid(2) == 0 { IndexScheme::OnSite } else { IndexScheme::InterSite };
    let periodic = Cell::periodic(scheme, rows.len())?;
    if periodic.min_doubled() == first {
        return parse_profile_csv_on(text, &periodic);
    }
    let truncated = Cell::truncated(scheme, -first as f64 / 2.0)?;
    parse_profile_csv_on(text, &truncated)
}

/// JSON formatter writing floats with 17 significant digits, otherwise
/// identical to serde_json's pretty printer.
pub struct PreciseFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl Default for PreciseFormatter<'_> {
    fn default() -> Self {
        PreciseFormatter { inner: serde_json::ser::PrettyFormatter::new() }
    }
}

impl serde_json::ser::Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Pretty JSON with 17-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

/// Serialized form of a [`WaveSolution`]; the profile itself goes to CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub config: SolverConfig,
    pub potential: Potential,
    pub sigma: f64,
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
    pub termination: Termination,
    pub in_cone: bool,
    pub near_constant: bool,
    pub cone_violations: u64,
    pub max_u: f64,
    pub participation_ratio: f64,
    pub energies: EnergyBreakdown,
    pub decay: Option<DecayFit>,
}

impl SolutionRecord {
    pub fn new(cfg: &SolverConfig, p: &Potential, sol: &WaveSolution) -> Self {
        SolutionRecord {
            config: cfg.clone(),
            potential: p.clone(),
            sigma: sol.sigma,
            residual: sol.residual,
            iterations: sol.iterations,
            converged: sol.converged,
            termination: sol.termination,
            in_cone: sol.in_cone,
            near_constant: sol.near_constant,
            cone_violations: sol.cone_violations,
            max_u: sol.profile.max_value(),
            participation_ratio: sol.participation_ratio(),
            energies: sol.energies,
            decay: sol.decay.clone(),
        }
    }
}

/// Streams `t,j,re,im,abs` rows of an evolution.
pub struct TimeSeriesWriter<W: Write> {
    out: W,
    sample_every: u64,
}

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(mut out: W, sample_every: u64) -> io::Result<Self> {
        writeln!(out, "t,j,re,im,abs")?;
        Ok(TimeSeriesWriter { out, sample_every: sample_every.max(1) })
    }

    /// Writes `state` if `step` is a multiple of the sampling interval.
    pub fn record(&mut self, step: u64, state: &EvolutionState) -> io::Result<()> {
        if !step.is_multiple_of(self.sample_every) {
            return Ok(());
        }
        let t = fmt_f64(state.time);
        for (pos, a) in state.amplitudes.iter().enumerate() {
            writeln!(
                self.out,
                "{t},{},{},{},{}",
                fmt_index(state.cell.doubled_index(pos)),
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(a.norm())
            )?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_formatting() {
        assert_eq!(fmt_index(-1), "-0.5");
        assert_eq!(fmt_index(1), "0.5");
        assert_eq!(fmt_index(0), "0");
        assert_eq!(fmt_index(-6), "-3");
        assert_eq!(fmt_index(5), "2.5");
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip_both_schemes() {
        for scheme in [IndexScheme::OnSite, IndexScheme::InterSite] {
            for n in [2usize, 3, 8, 25] {
                let cell = Cell::periodic(scheme, n).unwrap();
                let u = Profile::from_fn(cell, |j| (1.0 + j * j).recip().sqrt() / 3.0).unwrap();
                let text = profile_csv_string(&u);
                let back = parse_profile_csv(&text).unwrap();
                assert_eq!(back, u);
            }
        }
    }

    #[test]
    fn truncated_csv_round_trip() {
        let cell = Cell::truncated(IndexScheme::InterSite, 4.5).unwrap();
        let u = Profile::from_fn(cell, |j| (-j.abs()).exp()).unwrap();
        let text = profile_csv_string(&u);
        assert!(text.starts_with("j,u\n-4.5,"));
        assert_eq!(parse_profile_csv_on(&text, &cell).unwrap(), u);
        // an even symmetric inter-site range also fits a periodic cell
        assert!(parse_profile_csv(&text).unwrap().cell().is_periodic());
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(parse_profile_csv("x,y\n0,1\n").is_err());
        assert!(parse_profile_csv("j,u\n0.25,1\n").is_err());
        assert!(parse_profile_csv("j,u\n0,abc\n").is_err());
        assert!(parse_profile_csv("j,u\n").is_err());
        assert!(parse_profile_csv("j,u\n-1,1\n1,1\n").is_err());
    }

    #[test]
    fn json_uses_precise_floats() {
        let s = to_json_string(&serde_json::json!({"x": 0.1, "n": 3, "bad": f64::NAN})).unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"bad\": null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn time_series_sampling() {
        let cell = Cell::periodic(IndexScheme::OnSite, 2).unwrap();
        let state = EvolutionState::from_profile(&Profile::constant(cell, 2.0));
        let mut w = TimeSeriesWriter::new(Vec::new(), 3).unwrap();
        for step in 0..7 {
            w.record(step, &state).unwrap();
        }
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        // steps 0, 3, 6 with two sites each
        assert_eq!(text.lines().count(), 1 + 3 * 2);
        assert!(text.starts_with("t,j,re,im,abs\n"));
    }
}
