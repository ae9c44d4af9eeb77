//! The linearized free boundary problem around the background normal shock.
//!
//! Ahead of the shock the perturbation is carried by a potential φ with θ̇ = φ_ξ and
//! ṗ = φ_η/a₋, which solves the wave equation φ_ηη = κ²φ_ξξ marched in ξ. Behind the shock
//! (ṗ, θ̇) solve a first-order elliptic system on (ξ̄*, L)×(0, 1), while Ṡ and the Bernoulli
//! combination are transported along the streamlines.

use ndarray::Array2;
use serde::Serialize;

use crate::elliptic::{
    compatibility_residual, solve_first_order_elliptic, EllipticProblem, SolveOptions, Traces,
};
use crate::error::{Error, Result};
use crate::fields::StateFields;
use crate::gas::{derived, BackgroundShock, GasConstants, GsharpCoefficients};
use crate::grid::{diff1, interpolate1, RectGrid};
use crate::locator::{elliptic_coefficient, kdot, pstar, r_of_xi, ThetaPrimitive};
use crate::nozzle::NozzleSpec;
use crate::quadrature::trapezoid;

/// Background quantities shared by the linear and nonlinear solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearCoefficients {
    /// a± = (1/(ρq))·(1 − M²)/(ρq²) on each side.
    pub a_minus: f64,
    pub a_plus: f64,
    /// κ = √(−a₋q₋), the inverse characteristic slope ahead of the shock.
    pub kappa: f64,
    pub rho_plus: f64,
    pub t_plus: f64,
    pub jump_p: f64,
    pub kdot: f64,
}

impl LinearCoefficients {
    pub fn new(bg: &BackgroundShock, g: &GasConstants) -> Result<Self> {
        let a_minus = elliptic_coefficient(&bg.u_minus, g);
        let a_plus = elliptic_coefficient(&bg.u_plus, g);
        if !(a_minus < 0.0) {
            return Err(Error::Domain("upstream background is not supersonic".into()));
        }
        if !(a_plus > 0.0) {
            return Err(Error::Singular("downstream background is not subsonic".into()));
        }
        let dp = derived(&bg.u_plus, g)?;
        Ok(Self {
            a_minus,
            a_plus,
            kappa: (-a_minus * bg.u_minus.q).sqrt(),
            rho_plus: dp.rho,
            t_plus: dp.temperature,
            jump_p: bg.jump_p(),
            kdot: kdot(bg, g),
        })
    }
}

/// Grid on [0, L]×[0, 1] with `n_eta` nodes in η and the ξ step chosen so that
/// Δξ ≤ cfl·κΔη.
pub fn supersonic_grid(spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants, n_eta: usize, cfl: f64) -> Result<RectGrid> {
    let c = LinearCoefficients::new(bg, g)?;
    let h_eta = 1.0 / (n_eta.max(3) - 1) as f64;
    let dxi = cfl * c.kappa * h_eta;
    let n_xi = (spec.length / dxi).ceil() as usize + 1;
    RectGrid::new(spec.length, 1.0, n_xi.max(3), n_eta)
}

/// Linearized supersonic perturbation on the whole nozzle (U̇₋ extended to Ω).
pub fn solve_linear_supersonic(spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants, grid: &RectGrid) -> Result<StateFields> {
    let c = LinearCoefficients::new(bg, g)?;
    let (h_xi, h_eta) = (grid.h1(), grid.h2());
    let r = h_xi / (c.kappa * h_eta);
    if r > 1.0 + 1e-12 {
        return Err(Error::Step(format!("CFL number {r} exceeds 1 (Δξ = {h_xi}, κΔη = {})", c.kappa * h_eta)));
    }
    let mut out = StateFields::zeros(*grid);
    if spec.sigma == 0.0 {
        return Ok(out);
    }
    let prim = ThetaPrimitive::new(&spec.theta, spec.length);
    let top = |xi: f64| spec.sigma * prim.eval(xi);
    let (n1, n2) = (grid.n1, grid.n2);
    let r2 = r * r;
    let mass = derived(&bg.u_minus, g)?.rho * bg.u_minus.q;

    let mut phi = Array2::<f64>::zeros((n1, n2));
    // φ and φ_ξ vanish at the inlet and φ_ηη(0, ·) = 0, so the Taylor start is zero inside.
    phi[[1, n2 - 1]] = top(grid.x1(1));
    for n in 1..n1 - 1 {
        for j in 1..n2 - 1 {
            phi[[n + 1, j]] = 2.0 * phi[[n, j]] - phi[[n - 1, j]]
                + r2 * (phi[[n, j + 1]] - 2.0 * phi[[n, j]] + phi[[n, j - 1]]);
        }
        phi[[n + 1, n2 - 1]] = top(grid.x1(n + 1));
    }

    for j in 0..n2 {
        let col: Vec<f64> = (0..n1).map(|i| phi[[i, j]]).collect();
        let d = diff1(&col, h_xi);
        for i in 0..n1 {
            out.theta[[i, j]] = d[i];
        }
    }
    for i in 0..n1 {
        out.theta[[i, 0]] = 0.0;
        out.theta[[i, n2 - 1]] = spec.wall_angle(grid.x1(i));
        let row: Vec<f64> = (0..n2).map(|j| phi[[i, j]]).collect();
        let d = diff1(&row, h_eta);
        for j in 0..n2 {
            let p = d[j] / c.a_minus;
            out.p[[i, j]] = p;
            out.q[[i, j]] = -p / mass;
        }
    }
    Ok(out)
}

/// Per-column error of the integral identity a₋∫₀¹ṗ(ξ, η)dη = σ∫₀^ξΘ.
pub fn column_identity_errors(fields: &StateFields, spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants) -> Vec<f64> {
    let a_minus = elliptic_coefficient(&bg.u_minus, g);
    let prim = ThetaPrimitive::new(&spec.theta, spec.length);
    let grid = &fields.grid;
    (0..grid.n1)
        .map(|i| {
            let col: Vec<f64> = (0..grid.n2).map(|j| fields.p[[i, j]]).collect();
            a_minus * trapezoid(&col, grid.h2()) - spec.sigma * prim.eval(grid.x1(i))
        })
        .collect()
}

/// Samples one component of a field along ξ = `xi` by cubic interpolation in ξ.
pub(crate) fn column_at(a: &Array2<f64>, grid: &RectGrid, xi: f64) -> Vec<f64> {
    (0..grid.n2)
        .map(|j| {
            let row: Vec<f64> = (0..grid.n1).map(|i| a[[i, j]]).collect();
            interpolate1(&row, grid.x0, grid.h1(), xi)
        })
        .collect()
}

/// Grid on (ξ̄*, L)×(0, 1) with `n_eta` nodes in η and a matching ξ spacing.
pub fn subsonic_grid(xi_star: f64, spec: &NozzleSpec, n_eta: usize) -> Result<RectGrid> {
    let width = spec.length - xi_star;
    if !(xi_star > 0.0 && width > 0.0) {
        return Err(Error::Geometry(format!("shock anchor {xi_star} is not inside (0, {})", spec.length)));
    }
    let n_xi = ((width * (n_eta - 1) as f64).round() as usize).max(2) + 1;
    RectGrid::with_origin(xi_star, 0.0, width, 1.0, n_xi, n_eta)
}

/// Elliptic problem for (ṗ₊, θ̇₊) given the upstream pressure trace at the anchor.
pub fn assemble_linear_subsonic(
    xi_star: f64,
    spec: &NozzleSpec,
    bg: &BackgroundShock,
    g: &GasConstants,
    p_dot_minus_trace: &[f64],
    grid: &RectGrid,
) -> Result<EllipticProblem> {
    if p_dot_minus_trace.len() != grid.n2 {
        return Err(Error::Domain("upstream trace length does not match the grid".into()));
    }
    let c = LinearCoefficients::new(bg, g)?;
    let gs = GsharpCoefficients::new(bg, g)?;
    let mut traces = Traces::from_fns(grid, |_| 0.0, |_| 0.0, |eta| spec.sigma * spec.pressure.value(eta), |xi| spec.wall_angle(xi));
    traces.g1 = p_dot_minus_trace.iter().map(|p| gs.p * p).collect();
    if (grid.x0 - xi_star).abs() > 1e-12 * spec.length {
        return Err(Error::Domain(format!("grid starts at {} but the anchor is {xi_star}", grid.x0)));
    }
    EllipticProblem::new(*grid, bg.u_plus.q, c.a_plus, grid.zeros(), grid.zeros(), traces)
}

/// Ṗ* − R(ξ*): zero exactly when ξ* satisfies the solvability condition.
pub fn verify_solvability_identity(xi_star: f64, spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants) -> f64 {
    pstar(bg, g, &spec.pressure) - r_of_xi(spec, kdot(bg, g), xi_star)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOptions {
    pub n_eta: usize,
    pub cfl: f64,
    /// Relative compatibility defect removed by projection; the discrete defect of the
    /// linear problem is a discretization error of order h²σ.
    pub projection_tol: f64,
    pub compat_tol: f64,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self { n_eta: 129, cfl: 0.5, projection_tol: 1e-2, compat_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub xi_star: f64,
    pub u_dot_minus: StateFields,
    pub u_dot_plus: StateFields,
    /// ψ̇′ at the η nodes of the subsonic grid.
    pub psi_dot_prime: Vec<f64>,
    /// Discrete compatibility residual of the assembled subsonic problem before projection.
    pub compat_residual: f64,
}

impl LinearSolution {
    /// ψ̇(η) = ξ̄* − ∫_η¹ψ̇′.
    pub fn psi_dot(&self) -> Vec<f64> {
        anchored_curve(self.xi_star, &self.psi_dot_prime, self.u_dot_plus.grid.h2())
    }
}

/// ξ* − ∫_η¹ slope, by the cumulative trapezoid rule from the top.
pub fn anchored_curve(xi_star: f64, slope: &[f64], h: f64) -> Vec<f64> {
    let n = slope.len();
    let mut out = vec![xi_star; n];
    for j in (0..n - 1).rev() {
        out[j] = out[j + 1] - 0.5 * h * (slope[j] + slope[j + 1]);
    }
    out
}

/// Subsonic fields and shock slope from an assembled problem and the upstream traces.
pub fn solve_linear_subsonic(
    bg: &BackgroundShock,
    g: &GasConstants,
    prob: &EllipticProblem,
    p_dot_minus_trace: &[f64],
    theta_dot_minus_trace: &[f64],
    opts: &SolveOptions,
) -> Result<(StateFields, Vec<f64>)> {
    let c = LinearCoefficients::new(bg, g)?;
    let gs = GsharpCoefficients::new(bg, g)?;
    let (u1, u2) = solve_first_order_elliptic(prob, opts)?;
    let grid = prob.grid;
    let mut out = StateFields::zeros(grid);
    out.p = u1.values;
    out.theta = u2.values;
    let qp = bg.u_plus.q;
    for j in 0..grid.n2 {
        let s = gs.s * p_dot_minus_trace[j];
        let q0 = gs.q * p_dot_minus_trace[j];
        let conserved = qp * q0 + out.p[[0, j]] / c.rho_plus + c.t_plus * s;
        for i in 0..grid.n1 {
            out.s[[i, j]] = s;
            out.q[[i, j]] = if i == 0 { q0 } else { (conserved - out.p[[i, j]] / c.rho_plus - c.t_plus * s) / qp };
        }
    }
    let qm = bg.u_minus.q;
    let slope = (0..grid.n2).map(|j| (qp * out.theta[[0, j]] - qm * theta_dot_minus_trace[j]) / c.jump_p).collect();
    Ok((out, slope))
}

/// Solves the whole linear problem anchored at `xi_star`.
pub fn solve_linear_fbp(xi_star: f64, spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants, opts: &LinearOptions) -> Result<LinearSolution> {
    let sgrid = supersonic_grid(spec, bg, g, opts.n_eta, opts.cfl)?;
    let u_dot_minus = solve_linear_supersonic(spec, bg, g, &sgrid)?;
    let grid = subsonic_grid(xi_star, spec, opts.n_eta)?;
    let p_trace = column_at(&u_dot_minus.p, &sgrid, xi_star);
    let mut t_trace = column_at(&u_dot_minus.theta, &sgrid, xi_star);
    t_trace[0] = 0.0;
    *t_trace.last_mut().unwrap() = spec.wall_angle(xi_star);
    let prob = assemble_linear_subsonic(xi_star, spec, bg, g, &p_trace, &grid)?;
    let compat_residual = compatibility_residual(&prob);
    let sopts = SolveOptions { compat_tol: opts.compat_tol, projection_tol: Some(opts.projection_tol) };
    let (u_dot_plus, psi_dot_prime) = solve_linear_subsonic(bg, g, &prob, &p_trace, &t_trace, &sopts)?;
    Ok(LinearSolution { xi_star, u_dot_minus, u_dot_plus, psi_dot_prime, compat_residual })
}
