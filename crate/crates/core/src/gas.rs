//! Polytropic gas thermodynamics, the background normal shock and the
//! Rankine–Hugoniot residuals with their linearization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    pub gamma: f64,
    pub c_v: f64,
    pub s0: f64,
}

impl GasConstants {
    pub fn new(gamma: f64, c_v: f64, s0: f64) -> Result<Self> {
        if !(gamma > 1.0) || !(c_v > 0.0) || !s0.is_finite() {
            return Err(Error::Domain(format!(
                "gas constants need gamma > 1 and c_v > 0 (got gamma={gamma}, c_v={c_v}, s0={s0})"
            )));
        }
        Ok(Self { gamma, c_v, s0 })
    }

    pub fn air() -> Self {
        Self { gamma: 1.4, c_v: 1.0, s0: 0.0 }
    }

    /// Entropy of the state with pressure `p` and density `rho`.
    pub fn entropy(&self, p: f64, rho: f64) -> f64 {
        self.s0 + self.c_v * (p / ((self.gamma - 1.0) * rho.powf(self.gamma))).ln()
    }
}

/// State U = (p, θ, q, S).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub p: f64,
    pub theta: f64,
    pub q: f64,
    pub s: f64,
}

impl FlowState {
    pub fn new(p: f64, theta: f64, q: f64, s: f64) -> Self {
        Self { p, theta, q, s }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.p, self.theta, self.q, self.s]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { p: a[0], theta: a[1], q: a[2], s: a[3] }
    }

    pub fn u(&self) -> f64 {
        self.q * self.theta.cos()
    }

    pub fn v(&self) -> f64 {
        self.q * self.theta.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub rho: f64,
    pub c: f64,
    pub mach: f64,
    pub enthalpy: f64,
    pub temperature: f64,
    pub bernoulli: f64,
}

pub fn density(p: f64, s: f64, g: &GasConstants) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("non-positive pressure {p}")));
    }
    Ok(density_unchecked(p, s, g))
}

pub(crate) fn density_unchecked(p: f64, s: f64, g: &GasConstants) -> f64 {
    (p / ((g.gamma - 1.0) * ((s - g.s0) / g.c_v).exp())).powf(1.0 / g.gamma)
}

pub fn derived(u: &FlowState, g: &GasConstants) -> Result<Derived> {
    let rho = density(u.p, u.s, g)?;
    Ok(derived_with_rho(u, rho, g))
}

fn derived_with_rho(u: &FlowState, rho: f64, g: &GasConstants) -> Derived {
    let c2 = g.gamma * u.p / rho;
    let c = c2.sqrt();
    let enthalpy = g.gamma * u.p / ((g.gamma - 1.0) * rho);
    Derived {
        rho,
        c,
        mach: u.q / c,
        enthalpy,
        temperature: u.p / ((g.gamma - 1.0) * g.c_v * rho),
        bernoulli: 0.5 * u.q * u.q + enthalpy,
    }
}

/// Bernoulli quantity Φ = q²/2 + i, without validation.
pub(crate) fn bernoulli(u: &FlowState, g: &GasConstants) -> f64 {
    let rho = density_unchecked(u.p, u.s, g);
    0.5 * u.q * u.q + g.gamma * u.p / ((g.gamma - 1.0) * rho)
}

/// Characteristic eigenvalues λ± of the (p, θ) block.
pub fn eigenvalues(u: &FlowState, g: &GasConstants) -> Result<(f64, f64)> {
    let d = derived(u, g)?;
    if d.mach <= 1.0 {
        return Err(Error::Domain(format!("subsonic state (M = {}) has no real characteristics", d.mach)));
    }
    let root = (d.mach * d.mach - 1.0).sqrt();
    let rq = d.rho * u.q;
    let (s, c) = u.theta.sin_cos();
    Ok(((-s - c * root) / rq, (-s + c * root) / rq))
}

/// Uniform supersonic state ahead of a vertical shock and the subsonic state behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundShock {
    pub u_minus: FlowState,
    pub u_plus: FlowState,
}

impl BackgroundShock {
    /// Builds the background from the upstream pressure and Mach number; the entropy is
    /// chosen so that the mass flux ρ₋q₋ equals 1.
    pub fn from_upstream(p_minus: f64, mach_minus: f64, g: &GasConstants) -> Result<Self> {
        if !(p_minus > 0.0) {
            return Err(Error::Domain(format!("non-positive upstream pressure {p_minus}")));
        }
        if !(mach_minus > 1.0) {
            return Err(Error::NoAdmissibleState(format!("upstream Mach number {mach_minus} is not supersonic")));
        }
        let rho = 1.0 / (mach_minus * mach_minus * g.gamma * p_minus);
        let s = g.entropy(p_minus, rho);
        let q = 1.0 / rho;
        let u_minus = FlowState::new(p_minus, 0.0, q, s);
        let u_plus = normal_shock_downstream(&u_minus, g)?;
        Ok(Self { u_minus, u_plus })
    }

    /// Builds the background from a full upstream state; keeps p and M and shifts the
    /// entropy when needed so that ρ₋q₋ = 1.
    pub fn from_state(u_minus: &FlowState, g: &GasConstants) -> Result<Self> {
        if u_minus.theta != 0.0 {
            return Err(Error::Domain("background upstream flow angle must be 0".into()));
        }
        let d = derived(u_minus, g)?;
        if ((d.rho * u_minus.q) - 1.0).abs() > 1e-12 {
            log::warn!("upstream mass flux {} rescaled to 1 by shifting the entropy", d.rho * u_minus.q);
        }
        Self::from_upstream(u_minus.p, d.mach, g)
    }

    pub fn jump_p(&self) -> f64 {
        self.u_plus.p - self.u_minus.p
    }
}

/// Subsonic state behind a normal shock (entropy branch [p] > 0).
pub fn normal_shock_downstream(u_minus: &FlowState, g: &GasConstants) -> Result<FlowState> {
    if u_minus.theta != 0.0 {
        return Err(Error::Domain("normal shock needs an upstream flow angle of 0".into()));
    }
    let dm = derived(u_minus, g)?;
    let m2 = dm.mach * dm.mach;
    if !(dm.mach > 1.0) {
        return Err(Error::NoAdmissibleState(format!("upstream Mach number {} is not supersonic", dm.mach)));
    }
    let gm = g.gamma;
    let p_ratio = 1.0 + 2.0 * gm * (m2 - 1.0) / (gm + 1.0);
    let rho_ratio = (gm + 1.0) * m2 / ((gm - 1.0) * m2 + 2.0);
    let p = u_minus.p * p_ratio;
    let rho = dm.rho * rho_ratio;
    let q = u_minus.q / rho_ratio;
    let mut up = FlowState::new(p, 0.0, q, g.entropy(p, rho));

    let mass = dm.rho * u_minus.q;
    let momentum = mass * u_minus.q + u_minus.p;
    let energy = dm.bernoulli;
    let residual = |w: &FlowState| {
        let r = density_unchecked(w.p, w.s, g);
        let i = gm * w.p / ((gm - 1.0) * r);
        [r * w.q - mass, r * w.q * w.q + w.p - momentum, 0.5 * w.q * w.q + i - energy]
    };
    let f = residual(&up);
    let d = derived_with_rho(&up, density_unchecked(up.p, up.s, g), g);
    let (r, qq) = (d.rho, up.q);
    let c2 = d.c * d.c;
    let drho_ds = -r / (gm * g.c_v);
    let jac = [
        [qq / c2, r, qq * drho_ds],
        [qq * qq / c2 + 1.0, 2.0 * r * qq, qq * qq * drho_ds],
        [1.0 / r, qq, d.temperature],
    ];
    if let Some(dx) = solve3(&jac, &[-f[0], -f[1], -f[2]]) {
        let trial = FlowState::new(up.p + dx[0], 0.0, up.q + dx[1], up.s + dx[2]);
        let norm = |v: [f64; 3]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if trial.p > 0.0 && norm(residual(&trial)) <= norm(f) {
            up = trial;
        }
    }
    Ok(up)
}

/// The four residuals (G₁, G₂, G₃, G₄); brackets are `plus − minus`.
pub fn rh_residuals(u_plus: &FlowState, u_minus: &FlowState, psi_prime: f64, g: &GasConstants) -> Result<[f64; 4]> {
    let (up, vp) = (u_plus.u(), u_plus.v());
    let (um, vm) = (u_minus.u(), u_minus.v());
    if up.abs() <= 1e-14 * u_plus.q.abs() || um.abs() <= 1e-14 * u_minus.q.abs() {
        return Err(Error::Singular("horizontal velocity vanishes on the shock".into()));
    }
    let rp = density(u_plus.p, u_plus.s, g)?;
    let rm = density(u_minus.p, u_minus.s, g)?;
    let jp = u_plus.p - u_minus.p;
    let jv = vp - vm;
    let ip = g.gamma * u_plus.p / ((g.gamma - 1.0) * rp);
    let im = g.gamma * u_minus.p / ((g.gamma - 1.0) * rm);
    let g1 = (1.0 / (rp * up) - 1.0 / (rm * um)) * jp + (vp / up - vm / um) * jv;
    let g2 = ((up + u_plus.p / (rp * up)) - (um + u_minus.p / (rm * um))) * jp
        + (u_plus.p * vp / up - u_minus.p * vm / um) * jv;
    let g3 = (0.5 * u_plus.q * u_plus.q + ip) - (0.5 * u_minus.q * u_minus.q + im);
    let g4 = jv - psi_prime * jp;
    Ok([g1, g2, g3, g4])
}

/// Gradients of G₁..G₄ with respect to U₊ (`plus[j]`) and U₋ (`minus[j]`) at the background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhJacobians {
    pub plus: [[f64; 4]; 4],
    pub minus: [[f64; 4]; 4],
}

pub fn rh_jacobians(bg: &BackgroundShock, g: &GasConstants) -> RhJacobians {
    let jp = bg.jump_p();
    let side = |u: &FlowState, sign: f64| {
        let d = derived_with_rho(u, density_unchecked(u.p, u.s, g), g);
        let (r, q, p) = (d.rho, u.q, u.p);
        let c2 = d.c * d.c;
        let k = sign * jp / (r * q);
        let gcv = g.gamma * g.c_v;
        [
            [k * (-1.0 / (r * c2)), 0.0, k * (-1.0 / q), k / gcv],
            [k * (1.0 - p / (r * c2)), 0.0, k * (r * q - p / q), k * p / gcv],
            [sign / r, 0.0, sign * q, sign * p / ((g.gamma - 1.0) * g.c_v * r)],
            [0.0, sign * q, 0.0, 0.0],
        ]
    };
    RhJacobians { plus: side(&bg.u_plus, 1.0), minus: side(&bg.u_minus, -1.0) }
}

/// The 3×3 matrix acting on (ṗ₊, q̇₊, Ṡ₊) in the linearized conditions G₁..G₃.
pub fn bs_matrix(bg: &BackgroundShock, g: &GasConstants) -> [[f64; 3]; 3] {
    let b = rh_jacobians(bg, g).plus;
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        m[j] = [b[j][0], b[j][2], b[j][3]];
    }
    m
}

/// Closed-form shock data for a given upstream pressure perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShockTraceData {
    pub det_bs: f64,
    pub p_dot_plus: f64,
    pub q_dot_plus: f64,
    pub s_dot_plus: f64,
}

pub fn bs_matrix_and_gsharp(bg: &BackgroundShock, g: &GasConstants, p_dot_minus: f64) -> Result<ShockTraceData> {
    let c = GsharpCoefficients::new(bg, g)?;
    Ok(ShockTraceData {
        det_bs: c.det_bs,
        p_dot_plus: c.p * p_dot_minus,
        q_dot_plus: c.q * p_dot_minus,
        s_dot_plus: c.s * p_dot_minus,
    })
}

/// Coefficients of the linear maps ṗ₋ ↦ (ṗ₊, q̇₊, Ṡ₊).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsharpCoefficients {
    pub det_bs: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl GsharpCoefficients {
    pub fn new(bg: &BackgroundShock, g: &GasConstants) -> Result<Self> {
        let dp = derived(&bg.u_plus, g)?;
        let dm = derived(&bg.u_minus, g)?;
        if (dp.mach - 1.0).abs() < 1e-14 {
            return Err(Error::Singular("downstream background is sonic".into()));
        }
        let jp = bg.jump_p();
        let (rp, qp, pp) = (dp.rho, bg.u_plus.q, bg.u_plus.p);
        let (rm, qm) = (dm.rho, bg.u_minus.q);
        let mp2 = dp.mach * dp.mach;
        let mm2 = dm.mach * dm.mach;
        let det_bs = jp * jp * pp / ((g.gamma - 1.0) * g.c_v * (rp * qp).powi(3)) * (1.0 - mp2);
        let kdot = crate::locator::kdot(bg, g);
        let up = (mm2 - 1.0) / (rm * qm * qm);
        let down = rp * qp * qp / (mp2 - 1.0);
        Ok(Self {
            det_bs,
            p: down * up * (1.0 - kdot),
            q: up * (jp - down * (1.0 - kdot)),
            s: -((g.gamma - 1.0) * g.c_v / pp) * up * jp,
        })
    }
}
