//! Locate, seed and solve every admissible shock position, writing one directory per root.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use nozzle_shock::locator::{find_admissible_locations_with, LocationReport, RangeStatus};
use nozzle_shock::linear_fbp::solve_linear_fbp;
use nozzle_shock::output::{write_linear_csv, write_shock_csv, LinearManifest, ShockManifest};
use nozzle_shock::transonic::{lagrange_to_physical, solve_transonic};

use crate::config::{Mode, RunConfig, Setup};
use crate::failure::{Diagnostics, Failure, FailureKind};

#[derive(Serialize)]
struct Echoed<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct RootBody<'a, T: Serialize> {
    root: usize,
    #[serde(flatten)]
    manifest: &'a T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootStatus {
    Located,
    Linear,
    Converged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSummary {
    pub index: usize,
    pub xi_star: f64,
    pub r_prime_sign: i8,
    pub status: RootStatus,
    pub shock_wall_position: Option<f64>,
    /// |φ_s(Y_s) − ξ*| for the converged shock.
    pub wall_offset: Option<f64>,
    pub iterations: Option<usize>,
    pub validation_passed: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub p_star: f64,
    pub range: (f64, f64),
    pub in_range: bool,
    pub range_status: RangeStatus,
    pub admissible_locations: usize,
    /// Number of distinct shock solutions produced in this mode.
    pub non_uniqueness_count: usize,
    pub warnings: Vec<String>,
    pub roots: Vec<RootSummary>,
}

pub struct Outcome {
    pub exit_code: i32,
    pub summary: Option<Summary>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(FailureKind::Numerical, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::new(FailureKind::Numerical, format!("{}: {e}", path.display())))
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::new(FailureKind::Numerical, e.to_string())
}

fn solve_root(setup: &Setup, out: &Path, index: usize, xi: f64, sign: i8) -> (RootSummary, Option<Failure>) {
    let cfg = &setup.config;
    let mut summary = RootSummary {
        index,
        xi_star: xi,
        r_prime_sign: sign,
        status: RootStatus::Located,
        shock_wall_position: None,
        wall_offset: None,
        iterations: None,
        validation_passed: None,
        error: None,
    };
    let dir = root_dir(out, index);
    let fail = |mut s: RootSummary, f: Failure| {
        s.status = RootStatus::Failed;
        s.error = Some(f.message.clone());
        (s, Some(f))
    };

    let linear = match solve_linear_fbp(xi, &setup.spec, &setup.bg, &setup.gas, &cfg.linear_options()) {
        Ok(l) => l,
        Err(e) => return fail(summary, Failure::at_root(&e, index, xi)),
    };
    let lin_dir = dir.join("linear");
    let written = fs::create_dir_all(&lin_dir).map_err(io_failure).and_then(|_| {
        write_linear_csv(&lin_dir, &linear).map_err(io_failure)?;
        let manifest = LinearManifest::new(&linear, &setup.spec, &setup.bg, &setup.gas);
        write_json(&lin_dir.join("manifest.json"), &Echoed { config: cfg, body: RootBody { root: index, manifest: &manifest } })
    });
    if let Err(f) = written {
        return fail(summary, f);
    }
    summary.status = RootStatus::Linear;
    if cfg.mode != Mode::Full {
        return (summary, None);
    }

    let sol = match solve_transonic(&setup.spec, &setup.bg, &setup.gas, xi, &cfg.transonic_options()) {
        Ok(s) => s,
        Err(e) => return fail(summary, Failure::at_root(&e, index, xi)),
    };
    let phys = match lagrange_to_physical(&sol, &setup.gas) {
        Ok(p) => p,
        Err(e) => return fail(summary, Failure::at_root(&e, index, xi)),
    };
    let non_dir = dir.join("nonlinear");
    let written = fs::create_dir_all(&non_dir).map_err(io_failure).and_then(|_| {
        write_shock_csv(&non_dir, &sol, &phys).map_err(io_failure)?;
        let manifest = ShockManifest::new(&sol, &phys, &setup.bg);
        write_json(&non_dir.join("manifest.json"), &Echoed { config: cfg, body: RootBody { root: index, manifest: &manifest } })
    });
    if let Err(f) = written {
        return fail(summary, f);
    }
    summary.status = RootStatus::Converged;
    summary.shock_wall_position = Some(phys.wall_point.1);
    summary.wall_offset = Some(phys.wall_offset);
    summary.iterations = Some(sol.iterations);
    summary.validation_passed = Some(sol.validation.passed);
    if !sol.validation.passed {
        let msg = format!("final residuals above tolerance: R-H {:?}, exit pressure {:e}", sol.validation.rh_max, sol.validation.exit_pressure_max);
        let mut f = Failure::new(FailureKind::NonContraction, msg);
        f.root = Some(index);
        f.xi_star = Some(xi);
        return (summary, Some(f));
    }
    (summary, None)
}

fn range_failure(report: &LocationReport) -> Option<Failure> {
    if !report.in_range || report.status == RangeStatus::DegenerateShock {
        return Some(Failure::new(FailureKind::OutOfRange, report.message.clone()));
    }
    if report.admissible_roots().is_empty() {
        return Some(Failure::new(FailureKind::OutOfRange, format!("no admissible location: {}", report.message)));
    }
    None
}

/// Runs the configured pipeline into `out`; `threads` = 0 uses all cores.
pub fn run(setup: &Setup, out: &Path, threads: usize) -> Outcome {
    match run_inner(setup, out, threads) {
        Ok(o) => o,
        Err(f) => {
            let diag = Diagnostics::from_failures(vec![f]);
            let _ = fs::write(out.join("diagnostics.json"), diag.to_json() + "\n");
            eprintln!("{}", diag.to_json());
            Outcome { exit_code: diag.exit_code, summary: None }
        }
    }
}

fn run_inner(setup: &Setup, out: &Path, threads: usize) -> Result<Outcome, Failure> {
    let cfg = &setup.config;
    fs::create_dir_all(out).map_err(|e| Failure::new(FailureKind::Numerical, format!("{}: {e}", out.display())))?;
    fs::write(out.join("config.toml"), cfg.to_toml()).map_err(io_failure)?;
    let warnings = setup.spec.compatibility_warnings();
    for w in &warnings {
        log::warn!("{w}");
    }

    let report = find_admissible_locations_with(&setup.spec, &setup.bg, &setup.gas, cfg.locator_options());
    write_json(&out.join("locations.json"), &Echoed { config: cfg, body: &report })?;
    let roots: Vec<(usize, f64, i8)> =
        report.roots.iter().filter(|r| r.admissible()).enumerate().map(|(k, r)| (k, r.xi_star, r.r_prime_sign)).collect();

    let mut failures: Vec<Failure> = range_failure(&report).into_iter().collect();
    let mut root_summaries = Vec::new();
    if failures.is_empty() {
        if cfg.mode == Mode::LocateOnly {
            root_summaries = roots
                .iter()
                .map(|&(index, xi_star, r_prime_sign)| RootSummary {
                    index,
                    xi_star,
                    r_prime_sign,
                    status: RootStatus::Located,
                    shock_wall_position: None,
                    wall_offset: None,
                    iterations: None,
                    validation_passed: None,
                    error: None,
                })
                .collect();
        } else {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(io_failure)?;
            let results: Vec<(RootSummary, Option<Failure>)> =
                pool.install(|| roots.par_iter().map(|&(k, xi, sign)| solve_root(setup, out, k, xi, sign)).collect());
            for (s, f) in results {
                root_summaries.push(s);
                failures.extend(f);
            }
        }
    }

    let solved = match cfg.mode {
        Mode::LocateOnly => root_summaries.len(),
        Mode::LinearOnly => root_summaries.iter().filter(|r| r.status == RootStatus::Linear).count(),
        Mode::Full => root_summaries.iter().filter(|r| r.status == RootStatus::Converged).count(),
    };
    let summary = Summary {
        mode: cfg.mode,
        p_star: report.p_star,
        range: (report.r_lower, report.r_upper),
        in_range: report.in_range,
        range_status: report.status,
        admissible_locations: roots.len(),
        non_uniqueness_count: solved,
        warnings,
        roots: root_summaries,
    };
    write_json(&out.join("summary.json"), &Echoed { config: cfg, body: &summary })?;

    let diag = Diagnostics::from_failures(failures);
    if diag.exit_code != 0 {
        write_json(&out.join("diagnostics.json"), &diag)?;
        eprintln!("{}", diag.to_json());
    }
    Ok(Outcome { exit_code: diag.exit_code, summary: Some(summary) })
}

/// Directory holding the outputs for one root.
pub fn root_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("root_{index}"))
}
