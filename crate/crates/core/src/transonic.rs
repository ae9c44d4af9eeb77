//! Nonlinear free boundary iteration for the subsonic flow behind the shock.
//!
//! The subsonic region ψ(η) < ξ < L is mapped onto the fixed rectangle (ξ̄*, L)×(0, 1) by
//! ξ̃ = L + (L − ξ̄*)/(L − ψ(η))·(ξ − L). Each step linearizes around the background, moves
//! every nonlinear remainder to the right-hand side, picks δξ* from the solvability condition
//! of the elliptic part and solves for the new perturbation and shock slope.

use ndarray::Array2;
use serde::Serialize;

use crate::elliptic::{compatibility_residual, compatibility_scale, solve_first_order_elliptic, EllipticProblem, SolveOptions, Traces};
use crate::error::{Error, Result};
use crate::fields::StateFields;
use crate::gas::{bernoulli, bs_matrix, density_unchecked, rh_jacobians, rh_residuals, BackgroundShock, FlowState, GasConstants};
use crate::grid::{d_dx1, d_dx2, RectGrid};
use crate::linalg::solve3;
use crate::linear_fbp::{anchored_curve, solve_linear_fbp, supersonic_grid, LinearCoefficients, LinearOptions, LinearSolution};
use crate::nozzle::{physical_y, NozzleSpec};
use crate::supersonic::{solve_supersonic_nonlinear, MarchOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransonicOptions {
    pub n_eta: usize,
    pub cfl: f64,
    pub iter_tol: f64,
    pub max_iters: usize,
    /// Exponent of the discrete gradient part of the proxy norm.
    pub beta: f64,
    /// Radius of the admissible ball around the linear seed, in units of σ^{3/2}.
    pub ball_factor: f64,
    /// Abort when an iterate leaves the ball; otherwise exits are only recorded.
    pub enforce_ball: bool,
    /// The δξ* root is searched in ±bracket_width·σ.
    pub bracket_width: f64,
    pub sigma_max: f64,
    pub final_tol: f64,
    pub compat_tol: f64,
}

impl Default for TransonicOptions {
    fn default() -> Self {
        Self {
            n_eta: 129,
            cfl: 0.5,
            iter_tol: 1e-10,
            max_iters: 50,
            beta: 4.0,
            ball_factor: 0.5,
            enforce_ball: false,
            bracket_width: 20.0,
            sigma_max: 0.05,
            final_tol: 1e-8,
            compat_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    /// Perturbation of Ū₊ on the fixed rectangle.
    pub delta_u: StateFields,
    /// δψ′ at the η nodes.
    pub delta_psi_prime: Vec<f64>,
    pub delta_xi_star: f64,
    pub iteration: usize,
}

impl IterationState {
    pub fn from_linear(lin: &LinearSolution) -> Self {
        Self { delta_u: lin.u_dot_plus.clone(), delta_psi_prime: lin.psi_dot_prime.clone(), delta_xi_star: 0.0, iteration: 0 }
    }

    pub fn zero(grid: RectGrid) -> Self {
        Self { delta_u: StateFields::zeros(grid), delta_psi_prime: vec![0.0; grid.n2], delta_xi_star: 0.0, iteration: 0 }
    }
}

/// Right-hand sides of one linearized step.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledData {
    pub f1: Array2<f64>,
    pub f2: Array2<f64>,
    pub f3: Array2<f64>,
    /// g₁..g₄ at the shock nodes.
    pub g: [Vec<f64>; 4],
    /// B_s⁻¹(g₁, g₂, g₃).
    pub gsharp: [Vec<f64>; 3],
    pub delta_p3: Vec<f64>,
    pub delta_theta4: Vec<f64>,
    /// Shock position ψ(η) at the η nodes.
    pub psi: Vec<f64>,
}

/// Fixed data of one shock problem: nozzle, background, anchor and upstream flow.
#[derive(Debug, Clone)]
pub struct TransonicProblem {
    pub spec: NozzleSpec,
    pub bg: BackgroundShock,
    pub gas: GasConstants,
    pub xi_bar: f64,
    pub grid: RectGrid,
    pub coeffs: LinearCoefficients,
    pub supersonic: StateFields,
    beta_plus: [[f64; 4]; 4],
    bs: [[f64; 3]; 3],
}

/// Partial derivatives of the perturbation on the fixed rectangle.
struct Gradients {
    p_x: Array2<f64>,
    p_y: Array2<f64>,
    t_x: Array2<f64>,
    t_y: Array2<f64>,
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Derivatives on Ω(ψ) from those on the fixed rectangle: ∂_ξ = J∂_ξ̃ and
/// ∂_η = ∂_η̃ − (L − ξ̃)ψ′/(L − ψ)·∂_ξ̃ with J = (L − ξ̄*)/(L − ψ).
pub fn physical_derivatives(d_xt: f64, d_yt: f64, xi_t: f64, psi: f64, psi_prime: f64, xi_bar: f64, length: f64) -> (f64, f64) {
    let j = (length - xi_bar) / (length - psi);
    (j * d_xt, d_yt - (length - xi_t) * psi_prime / (length - psi) * d_xt)
}

impl TransonicProblem {
    pub fn new(spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants, xi_bar: f64, opts: &TransonicOptions) -> Result<Self> {
        if spec.sigma > opts.sigma_max {
            return Err(Error::Domain(format!("σ = {} exceeds the configured σ_max = {}", spec.sigma, opts.sigma_max)));
        }
        let coeffs = LinearCoefficients::new(bg, g)?;
        let grid = crate::linear_fbp::subsonic_grid(xi_bar, spec, opts.n_eta)?;
        let sgrid = supersonic_grid(spec, bg, g, opts.n_eta, opts.cfl)?;
        let supersonic = solve_supersonic_nonlinear(spec, bg, g, &sgrid, &MarchOptions::default())?;
        Ok(Self {
            spec: spec.clone(),
            bg: *bg,
            gas: *g,
            xi_bar,
            grid,
            coeffs,
            supersonic,
            beta_plus: rh_jacobians(bg, g).plus,
            bs: bs_matrix(bg, g),
        })
    }

    fn length(&self) -> f64 {
        self.spec.length
    }

    pub fn full_state(&self, du: &StateFields, i: usize, j: usize) -> FlowState {
        let b = self.bg.u_plus;
        FlowState::new(b.p + du.p[[i, j]], b.theta + du.theta[[i, j]], b.q + du.q[[i, j]], b.s + du.s[[i, j]])
    }

    /// ψ(η) = ξ̄* + δξ* − ∫_η¹δψ′.
    pub fn shock_curve(&self, delta_psi_prime: &[f64], delta_xi_star: f64) -> Result<Vec<f64>> {
        let psi = anchored_curve(self.xi_bar + delta_xi_star, delta_psi_prime, self.grid.h2());
        let l = self.length();
        if let Some(bad) = psi.iter().find(|&&x| !(x > 0.0 && x < l)) {
            return Err(Error::Geometry(format!("shock position {bad} left (0, {l})")));
        }
        Ok(psi)
    }

    fn gradients(&self, du: &StateFields) -> Gradients {
        let (h1, h2) = (self.grid.h1(), self.grid.h2());
        Gradients { p_x: d_dx1(&du.p, h1), p_y: d_dx2(&du.p, h2), t_x: d_dx1(&du.theta, h1), t_y: d_dx2(&du.theta, h2) }
    }

    /// Upstream state sampled along the shock curve.
    pub fn upstream_on_shock(&self, psi: &[f64]) -> Vec<FlowState> {
        psi.iter().enumerate().map(|(j, &x)| self.supersonic.interpolate(x, self.grid.x2(j))).collect()
    }

    fn assemble_with(&self, state: &IterationState, grads: &Gradients, delta_xi_star: f64) -> Result<AssembledData> {
        let grid = &self.grid;
        let g = &self.gas;
        let (n1, n2) = (grid.n1, grid.n2);
        let du = &state.delta_u;
        let dpsi = &state.delta_psi_prime;
        let l = self.length();
        let psi = self.shock_curve(dpsi, delta_xi_star)?;
        let (qp, ap) = (self.bg.u_plus.q, self.coeffs.a_plus);
        let (rho_p, t_p) = (self.coeffs.rho_plus, self.coeffs.t_plus);

        let mut f1 = grid.zeros();
        let mut f2 = grid.zeros();
        let mut f3 = grid.zeros();
        for i in 0..n1 {
            let xt = grid.x1(i);
            for j in 0..n2 {
                let u = self.full_state(du, i, j);
                let rho = density_unchecked(u.p, u.s, g);
                let rq = rho * u.q;
                let mach2 = u.q * u.q * rho / (g.gamma * u.p);
                let (sn, cs) = u.theta.sin_cos();
                let (p_xi, p_eta) = physical_derivatives(grads.p_x[[i, j]], grads.p_y[[i, j]], xt, psi[j], dpsi[j], self.xi_bar, l);
                let (t_xi, t_eta) = physical_derivatives(grads.t_x[[i, j]], grads.t_y[[i, j]], xt, psi[j], dpsi[j], self.xi_bar, l);
                let n1v = p_eta - sn / rq * p_xi + u.q * cs * t_xi;
                let n2v = t_eta - sn / rq * t_xi - cs / rq * (1.0 - mach2) / (rq * u.q) * p_xi;
                f1[[i, j]] = grads.p_y[[i, j]] + qp * grads.t_x[[i, j]] - n1v;
                f2[[i, j]] = grads.t_y[[i, j]] - ap * grads.p_x[[i, j]] - n2v;
                f3[[i, j]] = qp * du.q[[i, j]] + du.p[[i, j]] / rho_p + t_p * du.s[[i, j]] - bernoulli(&u, g);
            }
        }

        let upstream = self.upstream_on_shock(&psi);
        let mut gv: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n2]);
        let mut gs: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n2]);
        for j in 0..n2 {
            let u = self.full_state(du, 0, j);
            let d = [du.p[[0, j]], du.theta[[0, j]], du.q[[0, j]], du.s[[0, j]]];
            let res = rh_residuals(&u, &upstream[j], dpsi[j], g)?;
            for k in 0..3 {
                gv[k][j] = dot4(&self.beta_plus[k], &d) - res[k];
            }
            gv[3][j] = dot4(&self.beta_plus[3], &d) - self.coeffs.jump_p * dpsi[j] - res[3];
            let sol = solve3(&self.bs, &[gv[0][j], gv[1][j], gv[2][j]])
                .ok_or_else(|| Error::Singular("shock coefficient matrix is singular".into()))?;
            for k in 0..3 {
                gs[k][j] = sol[k];
            }
        }

        let exit: Vec<FlowState> = (0..n2).map(|j| self.full_state(du, n1 - 1, j)).collect();
        let y = physical_y(&exit, grid.h2(), g)?;
        let sigma = self.spec.sigma;
        let delta_p3 = y.iter().map(|&v| sigma * self.spec.pressure.value(v)).collect();
        let xi_star = self.xi_bar + delta_xi_star;
        let delta_theta4 = (0..n1)
            .map(|i| self.spec.wall_angle(((l - xi_star) * grid.x1(i) + delta_xi_star * l) / (l - self.xi_bar)))
            .collect();
        Ok(AssembledData { f1, f2, f3, g: gv, gsharp: gs, delta_p3, delta_theta4, psi })
    }

    /// Evaluates every right-hand side for the state at the given δξ*.
    pub fn assemble_rhs(&self, state: &IterationState, delta_xi_star: f64) -> Result<AssembledData> {
        self.assemble_with(state, &self.gradients(&state.delta_u), delta_xi_star)
    }

    /// The first-order elliptic problem for (δp*, δθ*).
    pub fn elliptic_problem(&self, data: &AssembledData) -> Result<EllipticProblem> {
        let traces = Traces { g1: data.gsharp[0].clone(), g2: vec![0.0; self.grid.n1], g3: data.delta_p3.clone(), g4: data.delta_theta4.clone() };
        EllipticProblem::new(self.grid, self.bg.u_plus.q, self.coeffs.a_plus, data.f1.clone(), data.f2.clone(), traces)
    }

    /// I(δξ*) = ∫δΘ₄ + a₊∫(g₁♯ − δP₃) − ∫f₂, discretized exactly as the elliptic
    /// compatibility condition; returns (I, scale).
    fn solvability_value(&self, state: &IterationState, grads: &Gradients, delta_xi_star: f64) -> Result<(f64, f64, AssembledData)> {
        let data = self.assemble_with(state, grads, delta_xi_star)?;
        let prob = self.elliptic_problem(&data)?;
        Ok((-compatibility_residual(&prob), compatibility_scale(&prob), data))
    }

    /// I(δξ*) for the given state.
    pub fn solvability_function(&self, state: &IterationState, delta_xi_star: f64) -> Result<f64> {
        Ok(self.solvability_value(state, &self.gradients(&state.delta_u), delta_xi_star)?.0)
    }

    /// Root of I by Newton iteration with finite-difference slopes, safeguarded by bisection.
    pub fn solve_delta_xi(&self, state: &IterationState, bracket_width: f64) -> Result<(f64, AssembledData)> {
        let grads = self.gradients(&state.delta_u);
        let eval = |x: f64| self.solvability_value(state, &grads, x);
        let (f0, scale, d0) = eval(0.0)?;
        let tol = 1e-12 * scale.max(self.spec.sigma).max(f64::MIN_POSITIVE);
        if f0.abs() <= tol {
            return Ok((0.0, d0));
        }
        let w = bracket_width * self.spec.sigma;
        let width_cap = 0.5 * self.xi_bar.min(self.length() - self.xi_bar);
        let w = w.min(width_cap);
        let sample = |x: f64| eval(x).map(|v| v.0);
        let (fa, fb) = (sample(-w)?, sample(w)?);
        if fa.signum() == fb.signum() {
            return Err(Error::SolvabilityRoot { samples: vec![(-w, fa), (0.0, f0), (w, fb)] });
        }
        let (mut lo, mut hi, mut flo) = (-w, w, fa);
        if f0.signum() == fa.signum() {
            lo = 0.0;
            flo = f0;
        } else {
            hi = 0.0;
        }
        let mut x = 0.0;
        let mut fx = f0;
        for _ in 0..100 {
            let h = 1e-7 * w.max(1e-12);
            let slope = (sample(x + h)? - sample(x - h)?) / (2.0 * h);
            let mut next = x - fx / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let (fn_, _, data) = eval(next)?;
            if fn_.abs() <= tol || (hi - lo) <= 1e-15 * w {
                return Ok((next, data));
            }
            if fn_.signum() == flo.signum() {
                lo = next;
                flo = fn_;
            } else {
                hi = next;
            }
            x = next;
            fx = fn_;
        }
        let (_, _, data) = eval(x)?;
        Ok((x, data))
    }

    /// One application of the iteration map.
    pub fn apply_iteration_map(&self, state: &IterationState, opts: &TransonicOptions) -> Result<(IterationState, f64)> {
        let (dxi, data) = self.solve_delta_xi(state, opts.bracket_width)?;
        let prob = self.elliptic_problem(&data)?;
        let residual = compatibility_residual(&prob);
        let (u1, u2) = solve_first_order_elliptic(&prob, &SolveOptions { compat_tol: opts.compat_tol, projection_tol: None })?;
        let grid = self.grid;
        let mut next = StateFields::zeros(grid);
        next.p = u1.values;
        next.theta = u2.values;
        let (qp, rho_p, t_p) = (self.bg.u_plus.q, self.coeffs.rho_plus, self.coeffs.t_plus);
        for j in 0..grid.n2 {
            let (pq, s) = (data.gsharp[1][j], data.gsharp[2][j]);
            let shock = qp * pq + next.p[[0, j]] / rho_p + t_p * s;
            for i in 0..grid.n1 {
                next.s[[i, j]] = s;
                next.q[[i, j]] = if i == 0 {
                    pq
                } else {
                    (shock + data.f3[[i, j]] - data.f3[[0, j]] - next.p[[i, j]] / rho_p - t_p * s) / qp
                };
            }
        }
        let slope = (0..grid.n2).map(|j| (qp * next.theta[[0, j]] - data.g[3][j]) / self.coeffs.jump_p).collect();
        Ok((IterationState { delta_u: next, delta_psi_prime: slope, delta_xi_star: dxi, iteration: state.iteration + 1 }, residual))
    }
}

/// sup|u| + (Σ h₁h₂|∇ₕu|^β)^{1/β} over one component.
pub fn field_norm(a: &Array2<f64>, grid: &RectGrid, beta: f64) -> f64 {
    let sup = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (h1, h2) = (grid.h1(), grid.h2());
    let (n1, n2) = a.dim();
    let mut sum = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            if i + 1 < n1 {
                sum += h1 * h2 * ((a[[i + 1, j]] - a[[i, j]]) / h1).abs().powf(beta);
            }
            if j + 1 < n2 {
                sum += h1 * h2 * ((a[[i, j + 1]] - a[[i, j]]) / h2).abs().powf(beta);
            }
        }
    }
    sup + sum.powf(1.0 / beta)
}

/// One-dimensional analogue of [`field_norm`] for traces on the shock.
pub fn trace_norm(v: &[f64], h: f64, beta: f64) -> f64 {
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sum: f64 = v.windows(2).map(|w| h * ((w[1] - w[0]) / h).abs().powf(beta)).sum();
    sup + sum.powf(1.0 / beta)
}

/// Proxy norm of (δU; δψ′): the field norm for p and θ, sup plus shock trace norm for q
/// and S, and the trace norm of δψ′.
pub fn state_norm(du: &StateFields, dpsi: &[f64], beta: f64) -> f64 {
    let grid = &du.grid;
    let h = grid.h2();
    let transported = |a: &Array2<f64>| {
        let sup = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let trace: Vec<f64> = (0..grid.n2).map(|j| a[[0, j]]).collect();
        sup + trace_norm(&trace, h, beta)
    };
    field_norm(&du.p, grid, beta) + field_norm(&du.theta, grid, beta) + transported(&du.q) + transported(&du.s) + trace_norm(dpsi, h, beta)
}

/// Proxy norm of the difference of two states, including |Δδξ*|.
pub fn state_distance(a: &IterationState, b: &IterationState, beta: f64) -> f64 {
    let du = a.delta_u.map2(&b.delta_u, |x, y| x - y);
    let dp: Vec<f64> = a.delta_psi_prime.iter().zip(&b.delta_psi_prime).map(|(x, y)| x - y).collect();
    state_norm(&du, &dp, beta) + (a.delta_xi_star - b.delta_xi_star).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub step: f64,
    pub ratio: Option<f64>,
    pub delta_xi_star: f64,
    pub distance_from_seed: f64,
    pub within_ball: bool,
    pub compat_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    /// Largest |G_j| over the shock nodes.
    pub rh_max: [f64; 4],
    pub exit_pressure_max: f64,
    /// Smallest p₊ − p₋ along the shock.
    pub min_jump_p: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ShockSolution {
    pub xi_bar: f64,
    pub xi_star: f64,
    pub eta: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    /// Supersonic state on [0, L]×[0, 1].
    pub u_minus: StateFields,
    /// Subsonic state on the fixed rectangle (ξ̄*, L)×(0, 1).
    pub u_plus: StateFields,
    pub linear: Option<LinearSolution>,
    pub log: Vec<IterationRecord>,
    pub validation: Validation,
    pub iterations: usize,
    pub length: f64,
}

impl ShockSolution {
    pub fn median_ratio(&self) -> Option<f64> {
        let mut r: Vec<f64> = self.log.iter().filter_map(|r| r.ratio).collect();
        if r.is_empty() {
            return None;
        }
        r.sort_by(|a, b| a.total_cmp(b));
        let n = r.len();
        Some(if n % 2 == 1 { r[n / 2] } else { 0.5 * (r[n / 2 - 1] + r[n / 2]) })
    }

    /// sup |U₊ − Ū₊| over the subsonic region.
    pub fn subsonic_departure(&self, bg: &BackgroundShock) -> f64 {
        let base = StateFields::uniform(self.u_plus.grid, &bg.u_plus);
        self.u_plus.map2(&base, |a, b| a - b).max_abs()
    }

    /// Fixed-rectangle coordinate of the physical point (ξ, η) behind the shock.
    pub fn fixed_coordinate(&self, xi: f64, j: usize) -> f64 {
        let l = self.length;
        l + (l - self.xi_bar) / (l - self.psi[j]) * (xi - l)
    }

    /// State at the Lagrange point (ξ, η_j) on either side of the shock.
    pub fn state_at(&self, xi: f64, j: usize) -> FlowState {
        let eta = self.eta[j];
        if xi < self.psi[j] {
            self.u_minus.interpolate(xi, eta)
        } else {
            self.u_plus.interpolate(self.fixed_coordinate(xi, j), eta)
        }
    }
}

fn validate(problem: &TransonicProblem, state: &IterationState, final_tol: f64) -> Result<(Validation, Vec<f64>)> {
    let g = &problem.gas;
    let grid = problem.grid;
    let psi = problem.shock_curve(&state.delta_psi_prime, state.delta_xi_star)?;
    let upstream = problem.upstream_on_shock(&psi);
    let mut rh_max = [0.0f64; 4];
    let mut min_jump = f64::INFINITY;
    for j in 0..grid.n2 {
        let u = problem.full_state(&state.delta_u, 0, j);
        let r = rh_residuals(&u, &upstream[j], state.delta_psi_prime[j], g)?;
        for k in 0..4 {
            rh_max[k] = rh_max[k].max(r[k].abs());
        }
        min_jump = min_jump.min(u.p - upstream[j].p);
    }
    let exit: Vec<FlowState> = (0..grid.n2).map(|j| problem.full_state(&state.delta_u, grid.n1 - 1, j)).collect();
    let y = physical_y(&exit, grid.h2(), g)?;
    let exit_max = exit
        .iter()
        .zip(&y)
        .map(|(u, &yy)| (u.p - problem.bg.u_plus.p - problem.spec.sigma * problem.spec.pressure.value(yy)).abs())
        .fold(0.0, f64::max);
    let passed = rh_max.iter().all(|r| *r <= final_tol) && exit_max <= final_tol && min_jump > 0.0;
    Ok((Validation { rh_max, exit_pressure_max: exit_max, min_jump_p: min_jump, passed }, psi))
}

fn background_solution(problem: &TransonicProblem) -> Result<ShockSolution> {
    let state = IterationState::zero(problem.grid);
    let (validation, psi) = validate(problem, &state, 0.0)?;
    Ok(ShockSolution {
        xi_bar: problem.xi_bar,
        xi_star: problem.xi_bar,
        eta: problem.grid.x2_nodes(),
        psi,
        psi_prime: state.delta_psi_prime,
        u_minus: problem.supersonic.clone(),
        u_plus: StateFields::uniform(problem.grid, &problem.bg.u_plus),
        linear: None,
        log: Vec::new(),
        validation,
        iterations: 0,
        length: problem.spec.length,
    })
}

/// Runs the linear seed and then iterates the map to a fixed point.
pub fn solve_transonic(
    spec: &NozzleSpec,
    bg: &BackgroundShock,
    g: &GasConstants,
    xi_bar: f64,
    opts: &TransonicOptions,
) -> Result<ShockSolution> {
    let problem = TransonicProblem::new(spec, bg, g, xi_bar, opts)?;
    solve_transonic_problem(&problem, opts)
}

pub fn solve_transonic_problem(problem: &TransonicProblem, opts: &TransonicOptions) -> Result<ShockSolution> {
    if problem.spec.sigma == 0.0 {
        return background_solution(problem);
    }
    let lin_opts = LinearOptions { n_eta: opts.n_eta, cfl: opts.cfl, ..LinearOptions::default() };
    let linear = solve_linear_fbp(problem.xi_bar, &problem.spec, &problem.bg, &problem.gas, &lin_opts)?;
    let seed = IterationState::from_linear(&linear);
    let radius = opts.ball_factor * problem.spec.sigma.powf(1.5);
    let mut state = seed.clone();
    let mut log = Vec::new();
    let mut prev_step: Option<f64> = None;
    let mut growing = 0;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let (next, residual) = problem.apply_iteration_map(&state, opts)?;
        let step = state_distance(&next, &state, opts.beta);
        let ratio = prev_step.filter(|p| *p > 0.0).map(|p| step / p);
        let distance = state_norm(
            &next.delta_u.map2(&seed.delta_u, |a, b| a - b),
            &next.delta_psi_prime.iter().zip(&seed.delta_psi_prime).map(|(a, b)| a - b).collect::<Vec<_>>(),
            opts.beta,
        );
        log::debug!("iteration {}: step {step:e}, ratio {ratio:?}, δξ* {:e}", next.iteration, next.delta_xi_star);
        log.push(IterationRecord {
            iteration: next.iteration,
            step,
            ratio,
            delta_xi_star: next.delta_xi_star,
            distance_from_seed: distance,
            within_ball: distance <= radius,
            compat_residual: residual,
        });
        state = next;
        if distance > radius && opts.enforce_ball {
            return Err(Error::BallExit { distance, radius });
        }
        if step < opts.iter_tol {
            converged = true;
            break;
        }
        growing = if ratio.is_some_and(|r| r > 1.0) { growing + 1 } else { 0 };
        if growing >= 3 {
            return Err(Error::NonContraction { iterations: state.iteration, ratios: log.iter().filter_map(|r| r.ratio).collect() });
        }
        prev_step = Some(step);
    }
    if !converged {
        return Err(Error::NonContraction { iterations: state.iteration, ratios: log.iter().filter_map(|r| r.ratio).collect() });
    }
    let outside = log.iter().filter(|r| !r.within_ball).count();
    if outside > 0 {
        let far = log.iter().map(|r| r.distance_from_seed).fold(0.0, f64::max);
        log::warn!("{outside} iterate(s) left the ball around the linear seed: distance up to {far:e}, radius {radius:e}");
    }
    let (validation, psi) = validate(problem, &state, opts.final_tol)?;
    let mut u_plus = StateFields::uniform(problem.grid, &problem.bg.u_plus);
    u_plus = u_plus.map2(&state.delta_u, |a, b| a + b);
    Ok(ShockSolution {
        xi_bar: problem.xi_bar,
        xi_star: problem.xi_bar + state.delta_xi_star,
        eta: problem.grid.x2_nodes(),
        psi,
        psi_prime: state.delta_psi_prime.clone(),
        u_minus: problem.supersonic.clone(),
        u_plus,
        linear: Some(linear),
        log,
        validation,
        iterations: state.iteration,
        length: problem.spec.length,
    })
}

/// Shock curve in physical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalShock {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Intersection with the upper wall, (Y_s, φ_s(Y_s)).
    pub wall_point: (f64, f64),
    /// |φ_s(Y_s) − ξ̄*|.
    pub wall_offset: f64,
}

/// Maps the shock curve (ψ(η), η) to (x, y) with x = ξ and y = ∫₀^η ds/(ρq cosθ)(ξ, s).
pub fn lagrange_to_physical(sol: &ShockSolution, g: &GasConstants) -> Result<PhysicalShock> {
    let n = sol.eta.len();
    let h = sol.eta[1] - sol.eta[0];
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let column: Vec<FlowState> = (0..=j).map(|k| sol.state_at(sol.psi[j], k)).collect();
        let ys = physical_y(&column, h, g)?;
        y.push(*ys.last().unwrap());
    }
    let wall_point = (y[n - 1], sol.psi[n - 1]);
    Ok(PhysicalShock { x: sol.psi.clone(), y, wall_point, wall_offset: (wall_point.1 - sol.xi_bar).abs() })
}

/// Largest σ in [lo, hi] (to `steps` bisections) at which the iteration converges.
pub fn estimate_sigma_max(
    spec: &NozzleSpec,
    bg: &BackgroundShock,
    g: &GasConstants,
    xi_bar: f64,
    opts: &TransonicOptions,
    lo: f64,
    hi: f64,
    steps: usize,
) -> f64 {
    let mut wide = *opts;
    wide.sigma_max = f64::INFINITY;
    let converges = |s: f64| solve_transonic(&spec.with_sigma(s), bg, g, xi_bar, &wide).is_ok_and(|r| r.validation.passed);
    if converges(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let m = 0.5 * (a + b);
        if converges(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}
