use std::fs::File;
use std::io::BufWriter;

use dnls_core::io::{profile_csv_string, SolutionRecord, TimeSeriesWriter};
use dnls_core::lattice::stagger;
use dnls_core::solver::HomoclinicStep;
use dnls_core::sweep::{linear_grid, write_summary_csv};
use dnls_core::{
    check_assumptions, check_relative_equilibrium_observed, homoclinic as run_homoclinic, oracle_maximize,
    solve as run_solve, sweep as run_sweep, HomoclinicOptions, Potential, SolverConfig, SweepParam, Verdict,
};
use log::warn;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::output::Artifacts;
use crate::{CheckPotentialArgs, EvolveArgs, HomoclinicArgs, OracleArgs, SolveArgs, SweepArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn op(message: impl Into<String>) -> Self {
        CliError { code: EXIT_FAILURE, message: message.into() }
    }
}

type Outcome = Result<i32, CliError>;

/// Caps the global rayon pool at `DNLS_THREADS` when set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DNLS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("DNLS_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn echo(r: &Resolved, extra: Value) -> Value {
    let mut v = json!({ "solver": r.config, "potential": r.potential.to_string() });
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

pub fn solve(args: &SolveArgs) -> Outcome {
    let r = args.solver.resolve()?;
    let mut out = Artifacts::new(args.solver.out_prefix("solve"))?;
    let sol = run_solve(&r.config, &r.potential).map_err(|e| CliError::op(e.to_string()))?;
    out.write_json(".json", &SolutionRecord::new(&r.config, &r.potential, &sol))?;
    out.write(".profile.csv", &profile_csv_string(&sol.profile))?;
    println!(
        "converged={} sigma={:.12} p_total={:.12} residual={:.3e} iterations={}",
        sol.converged, sol.sigma, sol.energies.p_total, sol.residual, sol.iterations
    );
    out.finish("solve", &echo(&r, json!({})))?;
    if sol.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: no convergence (residual {:.3e} after {} iterations)", sol.residual, sol.iterations);
        Ok(EXIT_FAILURE)
    }
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let r = args.solver.resolve()?;
    let param: SweepParam = args.param.parse().map_err(|e: dnls_core::Error| CliError::usage(e.to_string()))?;
    let values = match (&args.values, args.from, args.to, args.step) {
        (Some(v), _, _, _) => v.clone(),
        (None, Some(a), Some(b), Some(h)) => linear_grid(a, b, h).map_err(|e| CliError::usage(e.to_string()))?,
        _ => return Err(CliError::usage("give the grid with --values or --from/--to/--step")),
    };
    if values.is_empty() {
        return Err(CliError::usage("sweep grid is empty"));
    }
    let mut out = Artifacts::new(args.solver.out_prefix("sweep"))?;
    let points = run_sweep(&r.config, &r.potential, param, &values).map_err(|e| CliError::usage(e.to_string()))?;
    for (k, pt) in points.iter().enumerate() {
        let tag = format!(".{k:03}");
        match &pt.outcome {
            Ok(sol) => {
                out.write_json(&format!("{tag}.json"), &SolutionRecord::new(&pt.config, &r.potential, sol))?;
                out.write(&format!("{tag}.profile.csv"), &profile_csv_string(&sol.profile))?;
            }
            Err(e) => {
                warn!("{param} = {}: {e}", pt.param);
                out.write_json(
                    &format!("{tag}.json"),
                    &json!({ "config": pt.config, "potential": r.potential.to_string(), "error": e.to_string() }),
                )?;
            }
        }
    }
    let mut summary = Vec::new();
    write_summary_csv(&points, &mut summary).map_err(|e| CliError::op(e.to_string()))?;
    out.write(".summary.csv", &String::from_utf8(summary).expect("ascii"))?;
    let converged = points.iter().filter(|p| p.converged()).count();
    println!("{converged} of {} points converged", points.len());
    out.finish("sweep", &echo(&r, json!({ "param": param.to_string(), "values": values })))?;
    Ok(if converged > 0 { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Serialize)]
struct HomoclinicRecord<'a> {
    config: &'a SolverConfig,
    potential: String,
    verdict: Verdict,
    steps: &'a [HomoclinicStep],
}

pub fn homoclinic(args: &HomoclinicArgs) -> Outcome {
    let r = args.solver.resolve()?;
    if args.n_seq.len() < 2 || args.n_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage("--N-seq needs at least two strictly increasing periods"));
    }
    if args.n_seq[0] < 2 {
        return Err(CliError::usage("N must be ≥ 2"));
    }
    let options = HomoclinicOptions { margin: args.margin, ..Default::default() };
    let mut out = Artifacts::new(args.solver.out_prefix("homoclinic"))?;
    let report =
        run_homoclinic(&r.config, &r.potential, &args.n_seq, options).map_err(|e| CliError::op(e.to_string()))?;
    out.write_json(
        ".json",
        &HomoclinicRecord {
            config: &r.config,
            potential: r.potential.to_string(),
            verdict: report.verdict,
            steps: &report.steps,
        },
    )?;
    for (n, profile) in args.n_seq.iter().zip(&report.restricted) {
        out.write(&format!(".N{n}.profile.csv"), &profile_csv_string(profile))?;
    }
    println!("verdict={}", serde_json::to_value(report.verdict).expect("enum").as_str().unwrap_or("?"));
    out.finish("homoclinic", &echo(&r, json!({ "N_seq": args.n_seq, "margin": args.margin })))?;
    Ok(EXIT_OK)
}

pub fn check_potential(args: &CheckPotentialArgs) -> Outcome {
    let p: Potential = args.potential.parse().map_err(|e: dnls_core::Error| CliError::usage(e.to_string()))?;
    let report = check_assumptions(&p, args.x_max, args.samples).map_err(|e| CliError::usage(e.to_string()))?;
    let record = json!({ "potential": p.to_string(), "report": report });
    print!("{}", dnls_core::io::to_json_string(&record).map_err(|e| CliError::op(e.to_string()))?);
    if let Some(prefix) = &args.out {
        let mut out = Artifacts::new(prefix.clone())?;
        out.write_json(".json", &record)?;
        out.finish(
            "check-potential",
            &json!({ "potential": p.to_string(), "x_max": args.x_max, "samples": args.samples }),
        )?;
    }
    if report.passed {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: {p} violates the assumptions at {} sample points", report.violations.len());
        Ok(EXIT_FAILURE)
    }
}

pub fn oracle(args: &OracleArgs) -> Outcome {
    let r = args.solver.resolve()?;
    if r.config.n > 4 {
        return Err(CliError::usage(format!("the oracle handles N ≤ 4, got {}", r.config.n)));
    }
    let mut out = Artifacts::new(args.solver.out_prefix("oracle"))?;
    let best = oracle_maximize(&r.config, &r.potential, args.grid).map_err(|e| CliError::usage(e.to_string()))?;
    let sol = run_solve(&r.config, &r.potential).map_err(|e| CliError::op(e.to_string()))?;
    let p_solve = sol.energies.p_total;
    let relative = (best.p_total - p_solve).abs() / p_solve.abs().max(f64::MIN_POSITIVE);
    let sup = best.profile.sup_distance(&sol.profile);
    out.write_json(
        ".json",
        &json!({
            "config": r.config,
            "potential": r.potential.to_string(),
            "oracle_p_total": best.p_total,
            "solve_p_total": p_solve,
            "relative_difference": relative,
            "profile_sup_distance": sup,
            "evaluations": best.evaluations,
            "solve_converged": sol.converged,
        }),
    )?;
    out.write(".profile.csv", &profile_csv_string(&best.profile))?;
    out.write(".solve.profile.csv", &profile_csv_string(&sol.profile))?;
    println!("oracle_p_total={:.15} solve_p_total={p_solve:.15} relative_difference={relative:.3e}", best.p_total);
    out.finish("oracle", &echo(&r, json!({ "grid": args.grid })))?;
    Ok(EXIT_OK)
}

pub fn evolve(args: &EvolveArgs) -> Outcome {
    let r = args.solver.resolve()?;
    if !(args.dt > 0.0 && args.t_end > 0.0) {
        return Err(CliError::usage("--dt and --t-end must be positive"));
    }
    let mut out = Artifacts::new(args.solver.out_prefix("evolve"))?;
    let sol = run_solve(&r.config, &r.potential).map_err(|e| CliError::op(e.to_string()))?;
    if !sol.converged {
        return Err(CliError::op(format!("the wave did not converge (residual {:.3e})", sol.residual)));
    }
    let (profile, alpha) = if args.stagger {
        if r.config.n % 2 == 1 {
            warn!("staggering an odd period breaks the alternation across the boundary");
        }
        (stagger(&sol.profile), -r.config.alpha)
    } else {
        (sol.profile.clone(), r.config.alpha)
    };

    let series_path = out.path(".timeseries.csv");
    let file = File::create(&series_path).map_err(|e| CliError::op(format!("cannot write {series_path}: {e}")))?;
    let mut writer =
        TimeSeriesWriter::new(BufWriter::new(file), args.sample_every).map_err(|e| CliError::op(e.to_string()))?;
    let mut io_error = None;
    let report = check_relative_equilibrium_observed(
        &profile,
        sol.sigma,
        &r.potential,
        alpha,
        args.t_end,
        args.dt,
        &mut |step, state| {
            if io_error.is_none() {
                io_error = writer.record(step, state).err();
            }
        },
    )
    .map_err(|e| CliError::op(e.to_string()))?;
    if let Some(e) = io_error {
        return Err(CliError::op(format!("cannot write {series_path}: {e}")));
    }
    writer.finish().map_err(|e| CliError::op(e.to_string()))?;
    out.record(series_path);
    out.write_json(
        ".json",
        &json!({
            "config": r.config,
            "potential": r.potential.to_string(),
            "alpha_evolved": alpha,
            "staggered": args.stagger,
            "sigma": sol.sigma,
            "t_end": args.t_end,
            "dt": args.dt,
            "report": report,
        }),
    )?;
    out.write(".profile.csv", &profile_csv_string(&profile))?;
    println!(
        "modulus_drift={:.3e} sigma_mismatch={:.3e} power_drift={:.3e} hamiltonian_drift={:.3e}",
        report.modulus_drift, report.sigma_mismatch, report.power_drift, report.hamiltonian_drift
    );
    out.finish(
        "evolve",
        &echo(
            &r,
            json!({ "t_end": args.t_end, "dt": args.dt, "sample_every": args.sample_every, "stagger": args.stagger }),
        ),
    )?;
    Ok(EXIT_OK)
}
