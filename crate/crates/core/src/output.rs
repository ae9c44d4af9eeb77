//! Manifests and CSV grids for solver results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::StateFields;
use crate::gas::{BackgroundShock, GasConstants};
use crate::linear_fbp::{column_identity_errors, verify_solvability_identity, LinearSolution};
use crate::nozzle::NozzleSpec;
use crate::transonic::{IterationRecord, PhysicalShock, ShockSolution, Validation};

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io)?))
}

/// Largest absolute value per component, in (p, θ, q, S) order.
pub fn component_sup(f: &StateFields) -> [f64; 4] {
    let m = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    [m(&f.p), m(&f.theta), m(&f.q), m(&f.s)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearManifest {
    pub xi_star: f64,
    pub supersonic_grid: [usize; 2],
    pub subsonic_grid: [usize; 2],
    pub sup_u_dot_minus: [f64; 4],
    pub sup_u_dot_plus: [f64; 4],
    pub sup_psi_dot_prime: f64,
    pub psi_dot_top: f64,
    pub psi_dot_bottom: f64,
    pub compat_residual: f64,
    pub solvability_identity: f64,
    pub max_column_identity_error: f64,
}

impl LinearManifest {
    pub fn new(lin: &LinearSolution, spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants) -> Self {
        let psi = lin.psi_dot();
        let col = column_identity_errors(&lin.u_dot_minus, spec, bg, g);
        Self {
            xi_star: lin.xi_star,
            supersonic_grid: [lin.u_dot_minus.grid.n1, lin.u_dot_minus.grid.n2],
            subsonic_grid: [lin.u_dot_plus.grid.n1, lin.u_dot_plus.grid.n2],
            sup_u_dot_minus: component_sup(&lin.u_dot_minus),
            sup_u_dot_plus: component_sup(&lin.u_dot_plus),
            sup_psi_dot_prime: lin.psi_dot_prime.iter().fold(0.0, |m, v| m.max(v.abs())),
            psi_dot_top: *psi.last().unwrap(),
            psi_dot_bottom: psi[0],
            compat_residual: lin.compat_residual,
            solvability_identity: verify_solvability_identity(lin.xi_star, spec, bg, g),
            max_column_identity_error: col.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Writes `u_dot_minus.csv`, `u_dot_plus.csv` and `psi_dot.csv` into `dir`.
pub fn write_linear_csv(dir: &Path, lin: &LinearSolution) -> Result<()> {
    let mut w = create(&dir.join("u_dot_minus.csv"))?;
    lin.u_dot_minus.write_csv(&mut w, None)?;
    w.flush().map_err(io)?;
    let mut w = create(&dir.join("u_dot_plus.csv"))?;
    lin.u_dot_plus.write_csv(&mut w, None)?;
    w.flush().map_err(io)?;
    let mut w = create(&dir.join("psi_dot.csv"))?;
    writeln!(w, "eta,psi_dot_prime,psi_dot").map_err(io)?;
    let grid = lin.u_dot_plus.grid;
    for (j, (sp, s)) in lin.psi_dot_prime.iter().zip(lin.psi_dot()).enumerate() {
        writeln!(w, "{:e},{:e},{:e}", grid.x2(j), sp, s).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockManifest {
    pub xi_bar: f64,
    pub xi_star: f64,
    pub delta_xi_star: f64,
    pub iterations: usize,
    pub median_ratio: Option<f64>,
    pub subsonic_departure: f64,
    pub wall_point: (f64, f64),
    pub wall_offset: f64,
    pub validation: Validation,
    pub log: Vec<IterationRecord>,
}

impl ShockManifest {
    pub fn new(sol: &ShockSolution, phys: &PhysicalShock, bg: &BackgroundShock) -> Self {
        Self {
            xi_bar: sol.xi_bar,
            xi_star: sol.xi_star,
            delta_xi_star: sol.xi_star - sol.xi_bar,
            iterations: sol.iterations,
            median_ratio: sol.median_ratio(),
            subsonic_departure: sol.subsonic_departure(bg),
            wall_point: phys.wall_point,
            wall_offset: phys.wall_offset,
            validation: sol.validation.clone(),
            log: sol.log.clone(),
        }
    }
}

/// Writes `u_minus.csv`, `u_plus.csv` (at physical ξ) and `shock.csv` into `dir`.
pub fn write_shock_csv(dir: &Path, sol: &ShockSolution, phys: &PhysicalShock) -> Result<()> {
    let mut w = create(&dir.join("u_minus.csv"))?;
    sol.u_minus.write_csv(&mut w, None)?;
    w.flush().map_err(io)?;
    let grid = sol.u_plus.grid;
    let l = sol.length;
    let xi = Array2::from_shape_fn((grid.n1, grid.n2), |(i, j)| l + (l - sol.psi[j]) / (l - sol.xi_bar) * (grid.x1(i) - l));
    let mut w = create(&dir.join("u_plus.csv"))?;
    sol.u_plus.write_csv(&mut w, Some(&xi))?;
    w.flush().map_err(io)?;
    let mut w = create(&dir.join("shock.csv"))?;
    writeln!(w, "eta,psi,psi_prime,x,y").map_err(io)?;
    for j in 0..sol.eta.len() {
        writeln!(w, "{:e},{:e},{:e},{:e},{:e}", sol.eta[j], sol.psi[j], sol.psi_prime[j], phys.x[j], phys.y[j]).map_err(io)?;
    }
    w.flush().map_err(io)
}
