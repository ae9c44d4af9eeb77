//! Run configuration: parsing, checks and construction of the solver inputs.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use nozzle_shock::gas::derived;
use nozzle_shock::linear_fbp::LinearOptions;
use nozzle_shock::locator::LocatorOptions;
use nozzle_shock::{BackgroundShock, FlowState, GasConstants, NozzleSpec, Profile1D, TransonicOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LocateOnly,
    LinearOnly,
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub gas: GasConfig,
    pub upstream: Upstream,
    pub nozzle: NozzleConfig,
    pub exit_pressure: ProfileSource,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub iteration: Iteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    pub gamma: f64,
    pub c_v: f64,
    pub s0: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        let g = GasConstants::air();
        Self { gamma: g.gamma, c_v: g.c_v, s0: g.s0 }
    }
}

/// Upstream data as (p₋, M₋) or a full state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Upstream {
    Mach(MachUpstream),
    State(StateUpstream),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachUpstream {
    pub p: f64,
    pub mach: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateUpstream {
    pub p: f64,
    pub theta: f64,
    pub q: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSource {
    /// Expression in `x`; `L` is the nozzle length.
    Expression(String),
    /// Two-column CSV; relative paths are taken from the config file's directory.
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NozzleConfig {
    pub length: f64,
    pub sigma: f64,
    pub theta: ProfileSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub n_eta: usize,
    pub cfl: f64,
    pub scan_cells: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { n_eta: 129, cfl: 0.5, scan_cells: LocatorOptions::default().scan_cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub root_tol: f64,
    pub compat_tol: f64,
    pub iter_tol: f64,
    pub final_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let t = TransonicOptions::default();
        Self { root_tol: LocatorOptions::default().root_tol, compat_tol: t.compat_tol, iter_tol: t.iter_tol, final_tol: t.final_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Iteration {
    pub max_iters: usize,
    pub beta: f64,
    pub bracket_width: f64,
    pub sigma_max: f64,
    pub ball_factor: f64,
    pub enforce_ball: bool,
}

impl Default for Iteration {
    fn default() -> Self {
        let t = TransonicOptions::default();
        Self {
            max_iters: t.max_iters,
            beta: t.beta,
            bracket_width: t.bracket_width,
            sigma_max: t.sigma_max,
            ball_factor: t.ball_factor,
            enforce_ball: t.enforce_ball,
        }
    }
}

/// Validated solver inputs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub gas: GasConstants,
    pub bg: BackgroundShock,
    pub spec: NozzleSpec,
}

impl RunConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`; CSV paths are made absolute.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        } else {
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        for src in [&mut cfg.nozzle.theta, &mut cfg.exit_pressure] {
            if let ProfileSource::Csv(p) = src {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn gas_constants(&self) -> Result<GasConstants, String> {
        GasConstants::new(self.gas.gamma, self.gas.c_v, self.gas.s0).map_err(|e| e.to_string())
    }

    pub fn upstream_mach(&self, g: &GasConstants) -> Result<f64, String> {
        match self.upstream {
            Upstream::Mach(MachUpstream { mach, .. }) => Ok(mach),
            Upstream::State(StateUpstream { p, theta, q, s }) => derived(&FlowState::new(p, theta, q, s), g).map(|d| d.mach).map_err(|e| e.to_string()),
        }
    }

    pub fn background(&self, g: &GasConstants) -> Result<BackgroundShock, String> {
        let bg = match self.upstream {
            Upstream::Mach(MachUpstream { p, mach }) => BackgroundShock::from_upstream(p, mach, g),
            Upstream::State(StateUpstream { p, theta, q, s }) => BackgroundShock::from_state(&FlowState::new(p, theta, q, s), g),
        };
        bg.map_err(|e| e.to_string())
    }

    /// Checks every numeric setting; returns all problems found.
    pub fn check_settings(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let t = &self.tolerances;
        for (name, v) in [("root_tol", t.root_tol), ("compat_tol", t.compat_tol), ("iter_tol", t.iter_tol), ("final_tol", t.final_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("tolerances.{name} must be positive (got {v})"));
            }
        }
        if self.grids.n_eta < 5 {
            bad.push(format!("grids.n_eta must be at least 5 (got {})", self.grids.n_eta));
        }
        if !(self.grids.cfl > 0.0 && self.grids.cfl <= 1.0) {
            bad.push(format!("grids.cfl must lie in (0, 1] (got {})", self.grids.cfl));
        }
        if self.grids.scan_cells < 8 {
            bad.push(format!("grids.scan_cells must be at least 8 (got {})", self.grids.scan_cells));
        }
        let it = &self.iteration;
        if it.max_iters == 0 {
            bad.push("iteration.max_iters must be positive".into());
        }
        for (name, v) in [("beta", it.beta - 1.0), ("bracket_width", it.bracket_width), ("sigma_max", it.sigma_max), ("ball_factor", it.ball_factor)] {
            if !(v > 0.0) {
                bad.push(format!("iteration.{name} is out of range"));
            }
        }
        if self.mode == Mode::Full && self.nozzle.sigma > it.sigma_max {
            bad.push(format!("nozzle.sigma = {} exceeds iteration.sigma_max = {}", self.nozzle.sigma, it.sigma_max));
        }
        bad
    }

    pub fn nozzle_spec(&self) -> Result<NozzleSpec, String> {
        let l = self.nozzle.length;
        let theta = profile(&self.nozzle.theta, l, (0.0, l)).map_err(|e| format!("nozzle.theta: {e}"))?;
        let pressure = profile(&self.exit_pressure, l, (0.0, 1.0)).map_err(|e| format!("exit_pressure: {e}"))?;
        for (name, p, (a, b)) in [("nozzle.theta", &theta, (0.0, l)), ("exit_pressure", &pressure, (0.0, 1.0))] {
            for k in 0..=16 {
                let x = a + (b - a) * k as f64 / 16.0;
                if !p.value(x).is_finite() {
                    return Err(format!("{name} is not finite at x = {x}"));
                }
            }
        }
        NozzleSpec::new(l, self.nozzle.sigma, theta, pressure).map_err(|e| e.to_string())
    }

    /// Full construction; any failure is a configuration error.
    pub fn build(&self) -> Result<Setup, String> {
        let bad = self.check_settings();
        if !bad.is_empty() {
            return Err(bad.join("; "));
        }
        let gas = self.gas_constants()?;
        let bg = self.background(&gas)?;
        let spec = self.nozzle_spec()?;
        Ok(Setup { config: self.clone(), gas, bg, spec })
    }

    pub fn locator_options(&self) -> LocatorOptions {
        LocatorOptions { scan_cells: self.grids.scan_cells, root_tol: self.tolerances.root_tol }
    }

    pub fn linear_options(&self) -> LinearOptions {
        LinearOptions { n_eta: self.grids.n_eta, cfl: self.grids.cfl, compat_tol: self.tolerances.compat_tol, ..LinearOptions::default() }
    }

    pub fn transonic_options(&self) -> TransonicOptions {
        let it = &self.iteration;
        TransonicOptions {
            n_eta: self.grids.n_eta,
            cfl: self.grids.cfl,
            iter_tol: self.tolerances.iter_tol,
            max_iters: it.max_iters,
            beta: it.beta,
            ball_factor: it.ball_factor,
            enforce_ball: it.enforce_ball,
            bracket_width: it.bracket_width,
            sigma_max: it.sigma_max,
            final_tol: self.tolerances.final_tol,
            compat_tol: self.tolerances.compat_tol,
        }
    }
}

fn profile(src: &ProfileSource, length: f64, domain: (f64, f64)) -> nozzle_shock::Result<Profile1D> {
    match src {
        ProfileSource::Expression(e) => Profile1D::expression(e, length, domain),
        ProfileSource::Csv(p) => Profile1D::from_csv(p),
    }
}
