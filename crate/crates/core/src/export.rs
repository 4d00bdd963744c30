//! Run orchestration and file export.
//!
//! A run writes three files into its output directory:
//!
//! * `snapshots.csv`: coefficient rows (`record=coeff`) and diagnostics rows
//!   (`record=diag`) under one fixed header, see [`SNAPSHOT_HEADER`];
//! * `profiles.csv`: curves as `t,profile,coordinate,value`;
//! * `meta.json`: config echo, library version, onset report, status and
//!   wall time.
//!
//! Numbers are written with the shortest representation that round-trips,
//! so identical runs give byte-identical CSV files.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ModelTag, RunConfig};
use crate::error::{Error, Result};
use crate::model1d::{run_toy, solve_stationary, stationary_psi, stationary_residual, toy_extrema, toy_profiles};
use crate::model3d::run_3d;
use crate::par::{with_threads, Execution};
use crate::reduced::run_reduced;
use crate::report::{DiagnosticRow, OnsetKind, OnsetReport, RunReport, Snapshot};

pub const SNAPSHOT_HEADER: [&str; 19] = [
    "record",
    "t",
    "model",
    "step",
    "n",
    "l",
    "node",
    "r",
    "c",
    "d",
    "tail_ratio",
    "energy",
    "peak_value",
    "peak_position",
    "max_gradient",
    "zero_mode",
    "l2_velocity",
    "compat_residual",
    "asymmetry",
];

pub const PROFILE_HEADER: [&str; 4] = ["t", "profile", "coordinate", "value"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Onset,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Error => 1,
            RunStatus::Onset => 2,
        }
    }
}

/// Outcome of the stationary solver, recorded in `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryMeta {
    pub residual: f64,
    pub trivial: bool,
    pub march_iterations: usize,
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub model: ModelTag,
    /// Canonical config text; parses back to the config that produced it.
    pub config: String,
    pub version: String,
    pub status: RunStatus,
    pub onset: OnsetReport,
    pub steps: usize,
    pub t_end: f64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub error: Option<String>,
    pub stationary: Option<StationaryMeta>,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_idx(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn diag_record(model: &str, row: &DiagnosticRow) -> Vec<String> {
    let mut rec = vec!["diag".to_string(), num(row.t), model.to_string(), row.step.to_string()];
    rec.extend(std::iter::repeat_n(String::new(), 6));
    rec.extend([
        num(row.tail_ratio),
        num(row.energy),
        num(row.peak_value),
        num(row.peak_position),
        num(row.max_gradient),
        num(row.zero_mode),
        opt(row.l2_velocity),
        opt(row.compat_residual),
        opt(row.asymmetry),
    ]);
    rec
}

fn coeff_records<'a>(model: &'a str, snap: &'a Snapshot) -> impl Iterator<Item = Vec<String>> + 'a {
    snap.entries.iter().map(move |e| {
        let mut rec = vec![
            "coeff".to_string(),
            num(snap.t),
            model.to_string(),
            snap.step.to_string(),
            e.n.to_string(),
            opt_idx(e.l),
            opt_idx(e.node),
            opt(e.r),
            num(e.c),
            num(e.d),
        ];
        rec.extend(std::iter::repeat_n(String::new(), 9));
        rec
    })
}

/// Writes `snapshots.csv`. Coefficient and diagnostics rows are merged in
/// step order, diagnostics first within a step.
pub fn write_snapshots(path: &Path, model: ModelTag, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SNAPSHOT_HEADER)?;
    let tag = model.as_str();
    let mut snaps = report.snapshots.iter().peekable();
    for row in &report.diagnostics {
        while let Some(s) = snaps.next_if(|s| s.step < row.step) {
            for rec in coeff_records(tag, s) {
                w.write_record(&rec)?;
            }
        }
        w.write_record(diag_record(tag, row))?;
    }
    for s in snaps {
        for rec in coeff_records(tag, s) {
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_profiles(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PROFILE_HEADER)?;
    for p in &report.profiles {
        for (x, v) in p.coordinate.iter().zip(&p.value) {
            w.write_record([num(p.t), p.name.clone(), num(*x), num(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn stationary_report(cfg: &RunConfig) -> Result<(RunReport, StationaryMeta)> {
    let init = cfg.init_1d()?;
    let sol = solve_stationary(cfg.nu, &init, &cfg.stationary_options())?;
    let d = stationary_psi(&sol.c)?;
    let c = sol.c.coeffs();
    let (umax, arg, dumax) = toy_extrema(c, cfg.omega);
    let res = stationary_residual(&sol.c, cfg.nu);
    let mut report = RunReport::default();
    report.diagnostics.push(DiagnosticRow {
        step: 0,
        t: 0.0,
        tail_ratio: crate::diagnostics::onset::tail_ratio(c),
        energy: c.iter().map(|v| v * v).sum(),
        peak_value: umax,
        peak_position: arg,
        max_gradient: dumax,
        zero_mode: c[0],
        compat_residual: Some(res.iter().skip(1).fold(0.0, |m, v| m.max(v.abs()))),
        ..Default::default()
    });
    report.snapshots.push(Snapshot {
        step: 0,
        t: 0.0,
        entries: c
            .iter()
            .zip(d.coeffs())
            .enumerate()
            .map(|(n, (&c, &d))| crate::report::CoeffEntry {
                n,
                l: None,
                node: None,
                r: None,
                c,
                d,
            })
            .collect(),
    });
    report.profiles.extend(toy_profiles(0.0, c, d.coeffs(), cfg.omega));
    report.onset = Some(OnsetReport::none(Vec::new()));
    let meta = StationaryMeta {
        residual: sol.residual,
        trivial: sol.trivial,
        march_iterations: sol.march_iterations,
        newton_iterations: sol.newton_iterations,
    };
    Ok((report, meta))
}

/// Runs the model described by `cfg`, returning the report (and the
/// stationary summary for `stationary1d`).
pub fn simulate(cfg: &RunConfig, exec: Execution) -> Result<(RunReport, Option<StationaryMeta>)> {
    let cadence = cfg.cadence();
    match cfg.model {
        ModelTag::Toy1d => {
            let params = cfg.toy_params()?;
            let init = cfg.init_1d()?;
            Ok((run_toy(&params, &init, &cadence, exec)?.report, None))
        }
        ModelTag::Stationary1d => {
            let (r, m) = stationary_report(cfg)?;
            Ok((r, Some(m)))
        }
        ModelTag::Full3d => Ok((run_3d(&cfg.params_3d()?, &cadence, exec)?.report, None)),
        ModelTag::Polar2d | ModelTag::Cone => Ok((run_reduced(&cfg.reduced_params()?, &cadence, exec)?.report, None)),
    }
}

/// Runs `cfg` and writes the three output files into `out_dir`.
///
/// Solver failures are recorded in `meta.json` with status `error`; only
/// I/O and serialization failures are returned as `Err`. `threads` overrides
/// the config key; 0 means the pool default.
pub fn run_and_export(cfg: &RunConfig, out_dir: &Path, threads: Option<usize>) -> Result<Meta> {
    fs::create_dir_all(out_dir)?;
    let threads = threads.or(cfg.threads).unwrap_or(0);
    let start = Instant::now();
    let outcome = with_threads(threads, || simulate(cfg, Execution::Parallel));
    let wall = start.elapsed().as_secs_f64();

    let (report, stationary, error) = match outcome {
        Ok((r, s)) => (r, s, None),
        Err(e @ (Error::Io(_) | Error::Csv(_) | Error::Json(_))) => return Err(e),
        Err(e) => (RunReport::default(), None, Some(e.to_string())),
    };
    write_snapshots(&out_dir.join("snapshots.csv"), cfg.model, &report)?;
    write_profiles(&out_dir.join("profiles.csv"), &report)?;

    let onset = report.onset().clone();
    let status = if error.is_some() {
        RunStatus::Error
    } else if onset.kind != OnsetKind::None {
        RunStatus::Onset
    } else {
        RunStatus::Completed
    };
    let meta = Meta {
        model: cfg.model,
        config: cfg.to_text(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status,
        onset,
        steps: report.steps,
        t_end: report.t_end,
        threads,
        wall_time_s: wall,
        error,
        stationary,
    };
    fs::write(out_dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(meta)
}
