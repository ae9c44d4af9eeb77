//! Nozzle geometry, exit data and the Lagrange coordinate map.

use crate::error::{Error, Result};
use crate::gas::{density, FlowState, GasConstants};
use crate::profile::Profile1D;
use crate::quadrature::simpson;

const WALL_PANELS: usize = 2048;

/// Nozzle data: length, perturbation amplitude, upper-wall angle shape Θ and exit pressure shape P.
#[derive(Debug, Clone)]
pub struct NozzleSpec {
    pub length: f64,
    pub sigma: f64,
    pub theta: Profile1D,
    pub pressure: Profile1D,
}

impl NozzleSpec {
    pub fn new(length: f64, sigma: f64, theta: Profile1D, pressure: Profile1D) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Domain(format!("nozzle length must be positive (got {length})")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be non-negative (got {sigma})")));
        }
        Ok(Self { length, sigma, theta, pressure })
    }

    /// Same nozzle with another amplitude.
    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self { sigma, ..self.clone() }
    }

    /// Upper wall slope angle σΘ(x).
    pub fn wall_angle(&self, x: f64) -> f64 {
        self.sigma * self.theta.value(x)
    }

    /// Upper wall height φ_w(x) = 1 + ∫₀ˣ tan(σΘ).
    pub fn wall_height(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.length * (1.0 + 1e-12)).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.length)));
        }
        if self.sigma == 0.0 || x == 0.0 {
            return Ok(1.0);
        }
        let n = ((WALL_PANELS as f64 * x / self.length).ceil() as usize).max(16);
        let h = x / n as f64;
        for k in 0..=n {
            let a = self.wall_angle(k as f64 * h);
            if !(a.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Geometry(format!("wall angle {a} reaches pi/2 at x = {}", k as f64 * h)));
            }
        }
        Ok(1.0 + simpson(|s| self.wall_angle(s).tan(), 0.0, x, n))
    }

    /// Estimates (Θ(0), Θ′(0), Θ″(0)) from one-sided samples near the inlet.
    pub fn inlet_derivatives(&self) -> [f64; 3] {
        let h = 1e-4 * self.length;
        let d = |x: f64| self.theta.derivative(x);
        let (d0, d1, d2) = (d(0.0), d(h), d(2.0 * h));
        [self.theta.value(0.0), d0, 2.0 * (d1 - d0) / h - (d2 - d0) / (2.0 * h)]
    }

    /// Messages for violations of Θ(0) = Θ′(0) = Θ″(0) = 0; empty when compatible or σ = 0.
    pub fn compatibility_warnings(&self) -> Vec<String> {
        if self.sigma == 0.0 {
            return Vec::new();
        }
        let names = ["Theta(0)", "Theta'(0)", "Theta''(0)"];
        self.inlet_derivatives()
            .iter()
            .zip(names)
            .filter(|(v, _)| v.abs() > 1e-10)
            .map(|(v, n)| format!("inlet compatibility: {n} = {v:.3e} is not 0"))
            .collect()
    }
}

/// Heights Y(ξ, η_j) = ∫₀^η ds/(ρq cosθ) along a grid line with spacing `h_eta`.
pub fn physical_y(column: &[FlowState], h_eta: f64, g: &GasConstants) -> Result<Vec<f64>> {
    let mut inv = Vec::with_capacity(column.len());
    for u in column {
        let flux = density(u.p, u.s, g)? * u.q * u.theta.cos();
        if !(flux > 0.0) {
            return Err(Error::Inversion(format!("non-positive mass flux {flux}")));
        }
        inv.push(1.0 / flux);
    }
    Ok(crate::quadrature::cumulative_trapezoid(&inv, h_eta))
}
