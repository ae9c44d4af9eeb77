//! Nonlinear supersonic flow ahead of the shock, marched in ξ by characteristics.
//!
//! Upstream of the shock the flow is homentropic with constant Bernoulli quantity, so the
//! state on each column follows from (θ, ν) with ν the Prandtl–Meyer function. In Lagrange
//! coordinates θ − ν is constant along dη/dξ = ρq·sin m/cos(θ + m) and θ + ν along
//! dη/dξ = −ρq·sin m/cos(θ − m), where m = asin(1/M).

use crate::error::{Error, Result};
use crate::fields::StateFields;
use crate::gas::{derived, BackgroundShock, FlowState, GasConstants};
use crate::grid::{interpolate1, RectGrid};
use crate::nozzle::NozzleSpec;

/// Homentropic gas with fixed entropy and Bernoulli constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsentropicFamily {
    pub gamma: f64,
    pub s: f64,
    pub bernoulli: f64,
    k: f64,
}

impl IsentropicFamily {
    pub fn from_state(u: &FlowState, g: &GasConstants) -> Result<Self> {
        let d = derived(u, g)?;
        Ok(Self {
            gamma: g.gamma,
            s: u.s,
            bernoulli: d.bernoulli,
            k: (g.gamma - 1.0) * ((u.s - g.s0) / g.c_v).exp(),
        })
    }

    /// (p, q, ρ) at Mach number `m`.
    pub fn state(&self, m: f64) -> (f64, f64, f64) {
        let gm = self.gamma - 1.0;
        let i = 2.0 * self.bernoulli / (gm * m * m + 2.0);
        let p_over_rho = gm * i / self.gamma;
        let rho = (p_over_rho / self.k).powf(1.0 / gm);
        let p = self.k * rho.powf(self.gamma);
        let c = (self.gamma * p_over_rho).sqrt();
        (p, m * c, rho)
    }

    pub fn prandtl_meyer(&self, m: f64) -> f64 {
        let r = ((self.gamma + 1.0) / (self.gamma - 1.0)).sqrt();
        let b = (m * m - 1.0).sqrt();
        r * (b / r).atan() - b.atan()
    }

    /// Inverts ν(M) by safeguarded Newton iteration.
    pub fn mach_from_nu(&self, nu: f64, guess: f64) -> Result<f64> {
        let r = ((self.gamma + 1.0) / (self.gamma - 1.0)).sqrt();
        let nu_max = std::f64::consts::FRAC_PI_2 * (r - 1.0);
        if !(nu > 0.0 && nu < nu_max) {
            return Err(Error::Marching(format!("Prandtl–Meyer angle {nu} outside (0, {nu_max})")));
        }
        let (mut lo, mut hi) = (1.0, f64::INFINITY);
        let mut m = if guess > 1.0 { guess } else { 2.0 };
        for _ in 0..100 {
            let f = self.prandtl_meyer(m) - nu;
            if f > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
            let df = (m * m - 1.0).sqrt() / (m * (1.0 + 0.5 * (self.gamma - 1.0) * m * m));
            let mut next = m - f / df;
            if !(next > lo && next < hi) {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * m };
            }
            if (next - m).abs() <= 1e-15 * m {
                return Ok(next);
            }
            m = next;
        }
        Ok(m)
    }

    /// Characteristic slopes (C⁺, C⁻) in the (ξ, η) plane.
    pub fn speeds(&self, theta: f64, m: f64) -> (f64, f64) {
        let (_, q, rho) = self.state(m);
        let mu = (1.0 / m).asin();
        let rq = rho * q;
        (rq * mu.sin() / (theta + mu).cos(), -rq * mu.sin() / (theta - mu).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchOptions {
    /// Upper bound on the local Courant number max|dη/dξ|·Δξ/Δη.
    pub cfl_max: f64,
    /// Columns must keep M ≥ 1 + margin.
    pub mach_margin: f64,
    pub corrector_steps: usize,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self { cfl_max: 1.0, mach_margin: 1e-3, corrector_steps: 2 }
    }
}

/// Supersonic state on the whole nozzle with wall angles 0 (bottom) and σΘ (top).
pub fn solve_supersonic_nonlinear(
    spec: &NozzleSpec,
    bg: &BackgroundShock,
    g: &GasConstants,
    grid: &RectGrid,
    opts: &MarchOptions,
) -> Result<StateFields> {
    let mut out = StateFields::uniform(*grid, &bg.u_minus);
    if spec.sigma == 0.0 {
        return Ok(out);
    }
    let fam = IsentropicFamily::from_state(&bg.u_minus, g)?;
    let (n1, n2) = (grid.n1, grid.n2);
    let (h_xi, h_eta) = (grid.h1(), grid.h2());
    let m0 = derived(&bg.u_minus, g)?.mach;
    let mut theta = vec![0.0; n2];
    let mut mach = vec![m0; n2];
    let mut nu = vec![fam.prandtl_meyer(m0); n2];

    for n in 0..n1 - 1 {
        let xi_next = grid.x1(n + 1);
        let rp: Vec<f64> = (0..n2).map(|j| theta[j] - nu[j]).collect();
        let rm: Vec<f64> = (0..n2).map(|j| theta[j] + nu[j]).collect();
        let (sp, sm): (Vec<f64>, Vec<f64>) = (0..n2).map(|j| fam.speeds(theta[j], mach[j])).unzip();
        let courant = sp.iter().chain(&sm).fold(0.0f64, |a, s| a.max(s.abs())) * h_xi / h_eta;
        if courant > opts.cfl_max {
            return Err(Error::Step(format!("local Courant number {courant} exceeds {} at ξ = {}", opts.cfl_max, grid.x1(n))));
        }
        let foot = |eta: f64, speed: f64| (eta - speed * h_xi).clamp(0.0, 1.0);
        let mut new_theta = vec![0.0; n2];
        let mut new_mach = vec![0.0; n2];
        let mut new_nu = vec![0.0; n2];
        for j in 0..n2 {
            let eta = grid.x2(j);
            let (mut ap, mut am) = (sp[j], sm[j]);
            let (mut th, mut v, mut m) = (theta[j], nu[j], mach[j]);
            for k in 0..=opts.corrector_steps {
                let (fp, fm) = (foot(eta, ap), foot(eta, am));
                let r_plus = interpolate1(&rp, 0.0, h_eta, fp);
                let r_minus = interpolate1(&rm, 0.0, h_eta, fm);
                if j == 0 {
                    th = 0.0;
                    v = r_minus;
                } else if j == n2 - 1 {
                    th = spec.wall_angle(xi_next);
                    v = th - r_plus;
                } else {
                    th = 0.5 * (r_plus + r_minus);
                    v = 0.5 * (r_minus - r_plus);
                }
                m = fam.mach_from_nu(v, m)?;
                if k < opts.corrector_steps {
                    let (np, nm) = fam.speeds(th, m);
                    ap = 0.5 * (np + interpolate1(&sp, 0.0, h_eta, fp));
                    am = 0.5 * (nm + interpolate1(&sm, 0.0, h_eta, fm));
                }
            }
            if m < 1.0 + opts.mach_margin {
                return Err(Error::Marching(format!("Mach number {m} at (ξ, η) = ({xi_next}, {eta}) is not supersonic")));
            }
            new_theta[j] = th;
            new_nu[j] = v;
            new_mach[j] = m;
        }
        theta = new_theta;
        nu = new_nu;
        mach = new_mach;
        for j in 0..n2 {
            let (p, q, _) = fam.state(mach[j]);
            out.set(n + 1, j, &FlowState::new(p, theta[j], q, fam.s));
        }
    }
    Ok(out)
}
