//! Report-only configuration check: predicts what a run would find without solving anything.

use serde::Serialize;

use nozzle_shock::linear_fbp::supersonic_grid;
use nozzle_shock::locator::find_admissible_locations_with;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub admissible_locations: Option<Vec<f64>>,
    pub verdict: String,
}

fn check(name: &'static str, r: Result<String, String>) -> Check {
    match r {
        Ok(detail) => Check { name, ok: true, detail },
        Err(detail) => Check { name, ok: false, detail },
    }
}

pub fn validate(cfg: &RunConfig) -> Report {
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let bad = cfg.check_settings();
    checks.push(check("settings", if bad.is_empty() { Ok("all numeric settings in range".into()) } else { Err(bad.join("; ")) }));

    let gas = cfg.gas_constants();
    checks.push(check("gas", gas.as_ref().map(|g| format!("gamma = {}", g.gamma)).map_err(Clone::clone)));
    let mach = gas.as_ref().map_err(Clone::clone).and_then(|g| cfg.upstream_mach(g));
    checks.push(check(
        "upstream",
        mach.and_then(|m| if m > 1.0 { Ok(format!("M = {m}")) } else { Err(format!("upstream flow is not supersonic (M = {m})")) }),
    ));
    let bg = gas.as_ref().map_err(Clone::clone).and_then(|g| cfg.background(g));
    checks.push(check("background", bg.as_ref().map(|b| format!("p+ = {}", b.u_plus.p)).map_err(Clone::clone)));
    let spec = cfg.nozzle_spec();
    checks.push(check("nozzle", spec.as_ref().map(|s| format!("L = {}, sigma = {}", s.length, s.sigma)).map_err(Clone::clone)));

    let mut located = None;
    let mut verdict = "invalid configuration".to_string();
    if let (Ok(g), Ok(bg), Ok(spec)) = (&gas, &bg, &spec) {
        warnings = spec.compatibility_warnings();
        checks.push(check(
            "cfl",
            supersonic_grid(spec, bg, g, cfg.grids.n_eta, cfg.grids.cfl)
                .map(|grid| format!("{}x{} supersonic grid", grid.n1, grid.n2))
                .map_err(|e| e.to_string()),
        ));
        let report = find_admissible_locations_with(spec, bg, g, cfg.locator_options());
        let roots = report.admissible_roots();
        if report.in_range && !roots.is_empty() && checks.iter().all(|c| c.ok) {
            verdict = match roots.len() {
                1 => "1 admissible location expected".into(),
                n => format!("{n} admissible locations expected"),
            };
        } else if !report.in_range || roots.is_empty() {
            verdict = format!("no admissible location: {}", report.message);
        }
        checks.push(Check { name: "range", ok: report.in_range, detail: report.message });
        located = Some(roots);
    }
    Report { checks, warnings, admissible_locations: located, verdict }
}
