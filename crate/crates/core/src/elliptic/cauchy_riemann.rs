use ndarray::Array2;

use super::poisson::solve_mixed;
use crate::error::{Error, Result};
use crate::grid::{d_dx1, d_dx2, diff1, integrate2, RectGrid, ScalarField2D};
use crate::quadrature::trapezoid;

/// Dirichlet-component traces sampled at the edge nodes: `g1` on x₁ = 0 and `g3` on x₁ = ℓ₁
/// (n₂ samples, for u₁); `g2` on x₂ = 0 and `g4` on x₂ = ℓ₂ (n₁ samples, for u₂).
#[derive(Debug, Clone, PartialEq)]
pub struct Traces {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub g3: Vec<f64>,
    pub g4: Vec<f64>,
}

impl Traces {
    pub fn zeros(grid: &RectGrid) -> Self {
        Self { g1: vec![0.0; grid.n2], g2: vec![0.0; grid.n1], g3: vec![0.0; grid.n2], g4: vec![0.0; grid.n1] }
    }

    /// Samples traces from functions of the running edge coordinate.
    pub fn from_fns(
        grid: &RectGrid,
        g1: impl Fn(f64) -> f64,
        g2: impl Fn(f64) -> f64,
        g3: impl Fn(f64) -> f64,
        g4: impl Fn(f64) -> f64,
    ) -> Self {
        let x1 = grid.x1_nodes();
        let x2 = grid.x2_nodes();
        Self {
            g1: x2.iter().map(|&y| g1(y)).collect(),
            g2: x1.iter().map(|&x| g2(x)).collect(),
            g3: x2.iter().map(|&y| g3(y)).collect(),
            g4: x1.iter().map(|&x| g4(x)).collect(),
        }
    }

    fn check(&self, grid: &RectGrid) -> Result<()> {
        if self.g1.len() != grid.n2 || self.g3.len() != grid.n2 || self.g2.len() != grid.n1 || self.g4.len() != grid.n1 {
            return Err(Error::Domain("trace lengths do not match the grid".into()));
        }
        Ok(())
    }

    fn scale_u1(&self, r: f64) -> Self {
        Self {
            g1: self.g1.iter().map(|v| v * r).collect(),
            g2: self.g2.clone(),
            g3: self.g3.iter().map(|v| v * r).collect(),
            g4: self.g4.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem {
    pub grid: RectGrid,
    pub a1: f64,
    pub a2: f64,
    pub f1: Array2<f64>,
    pub f2: Array2<f64>,
    pub traces: Traces,
}

impl EllipticProblem {
    pub fn new(grid: RectGrid, a1: f64, a2: f64, f1: Array2<f64>, f2: Array2<f64>, traces: Traces) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::Domain(format!("coefficients must be positive (a1={a1}, a2={a2})")));
        }
        if f1.dim() != (grid.n1, grid.n2) || f2.dim() != (grid.n1, grid.n2) {
            return Err(Error::Domain("source shapes do not match the grid".into()));
        }
        traces.check(&grid)?;
        Ok(Self { grid, a1, a2, f1, f2, traces })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance on the compatibility residual.
    pub compat_tol: f64,
    /// When set, defects up to this relative size are removed by projecting f₂.
    pub projection_tol: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { compat_tol: 1e-8, projection_tol: None }
    }
}

fn residual_parts(grid: &RectGrid, a2: f64, f2: &Array2<f64>, t: &Traces) -> (f64, f64) {
    let (h1, h2) = (grid.h1(), grid.h2());
    let top: Vec<f64> = t.g4.iter().zip(&t.g2).map(|(a, b)| a - b).collect();
    let side: Vec<f64> = t.g1.iter().zip(&t.g3).map(|(a, b)| a - b).collect();
    let res = integrate2(f2, grid) - trapezoid(&top, h1) - a2 * trapezoid(&side, h2);
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let scale = integrate2(&f2.mapv(f64::abs), grid)
        + trapezoid(&abs(&t.g4), h1)
        + trapezoid(&abs(&t.g2), h1)
        + a2 * (trapezoid(&abs(&t.g1), h2) + trapezoid(&abs(&t.g3), h2));
    (res, scale)
}

/// ∫f₂ − ∫(g₄ − g₂)dx₁ − a₂∫(g₁ − g₃)dx₂ by the trapezoid rule on the grid.
pub fn compatibility_residual(prob: &EllipticProblem) -> f64 {
    residual_parts(&prob.grid, prob.a2, &prob.f2, &prob.traces).0
}

/// Sum of the magnitudes of the terms in the compatibility residual.
pub fn compatibility_scale(prob: &EllipticProblem) -> f64 {
    residual_parts(&prob.grid, prob.a2, &prob.f2, &prob.traces).1
}

fn check_compatibility(res: f64, scale: f64, opts: &SolveOptions) -> Result<()> {
    let tol = opts.compat_tol * scale.max(f64::MIN_POSITIVE);
    if res.abs() <= tol {
        return Ok(());
    }
    if let Some(p) = opts.projection_tol {
        if res.abs() <= p * scale {
            log::debug!("projecting compatibility defect {res:e}");
            return Ok(());
        }
    }
    Err(Error::Solvability { residual: res, tolerance: tol })
}

/// Central differences inside, third-order one-sided differences on the edges, where the
/// ghost-node closure scales source errors by 1/h.
fn source_derivative(a: &Array2<f64>, h: f64, axis: usize) -> Array2<f64> {
    let mut out = if axis == 0 { d_dx1(a, h) } else { d_dx2(a, h) };
    let n = a.len_of(ndarray::Axis(axis));
    if n < 4 {
        return out;
    }
    for (mut d, v) in out.lanes_mut(ndarray::Axis(axis)).into_iter().zip(a.lanes(ndarray::Axis(axis))) {
        d[0] = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h);
        d[n - 1] = (11.0 * v[n - 1] - 18.0 * v[n - 2] + 9.0 * v[n - 3] - 2.0 * v[n - 4]) / (6.0 * h);
    }
    out
}

/// Solves ∂₂v₁ + ∂₁v₂ = f₁, ∂₂v₂ − ∂₁v₁ = f₂ with the four Dirichlet-component traces.
///
/// Each component solves its own Poisson problem, Δv₁ = ∂₂f₁ − ∂₁f₂ and Δv₂ = ∂₁f₁ + ∂₂f₂,
/// with its prescribed traces and the normal derivative supplied by the other equation.
/// For compatible data this reproduces the smooth solution without corner singularities.
pub fn solve_cauchy_riemann(
    f1: &Array2<f64>,
    f2: &Array2<f64>,
    traces: &Traces,
    grid: &RectGrid,
    opts: &SolveOptions,
) -> Result<(Array2<f64>, Array2<f64>)> {
    traces.check(grid)?;
    let (res, scale) = residual_parts(grid, 1.0, f2, traces);
    check_compatibility(res, scale, opts)?;
    let f2 = f2 - res / (grid.l1 * grid.l2);

    let (h1, h2) = (grid.h1(), grid.h2());
    let (n1, n2) = (grid.n1, grid.n2);
    let rhs1 = source_derivative(f1, h2, 1) - source_derivative(&f2, h1, 0);
    let rhs2 = source_derivative(f1, h1, 0) + source_derivative(&f2, h2, 1);
    let (dg1, dg3) = (diff1(&traces.g1, h2), diff1(&traces.g3, h2));
    let (dg2, dg4) = (diff1(&traces.g2, h1), diff1(&traces.g4, h1));

    let bottom: Vec<f64> = (0..n1).map(|i| dg2[i] - f1[[i, 0]]).collect();
    let top: Vec<f64> = (0..n1).map(|i| f1[[i, n2 - 1]] - dg4[i]).collect();
    let v1 = solve_mixed(&traces.g1, &traces.g3, &bottom, &top, &rhs1, grid)?;

    let left: Vec<f64> = (0..n2).map(|j| dg1[j] - f1[[0, j]]).collect();
    let right: Vec<f64> = (0..n2).map(|j| f1[[n1 - 1, j]] - dg3[j]).collect();
    let flipped = RectGrid::new(grid.l2, grid.l1, n2, n1)?;
    let v2 = solve_mixed(&traces.g2, &traces.g4, &left, &right, &rhs2.t().to_owned(), &flipped)?;
    Ok((v1, v2.t().to_owned()))
}

/// Reduces the constant-coefficient system to Cauchy–Riemann form by
/// y₁ = x₁/√(a₁a₂), v₁ = √(a₂/a₁)u₁, solves it and maps back.
pub fn solve_first_order_elliptic(prob: &EllipticProblem, opts: &SolveOptions) -> Result<(ScalarField2D, ScalarField2D)> {
    let s = (prob.a1 * prob.a2).sqrt();
    let r = (prob.a2 / prob.a1).sqrt();
    let grid = prob.grid.rescaled(1.0 / s, 1.0);
    let f1 = prob.f1.mapv(|v| v * r);
    let traces = prob.traces.scale_u1(r);
    let (v1, v2) = solve_cauchy_riemann(&f1, &prob.f2, &traces, &grid, opts)?;
    Ok((ScalarField2D::new(prob.grid, v1.mapv(|v| v / r)), ScalarField2D::new(prob.grid, v2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn l2(a: &Array2<f64>, b: &Array2<f64>, g: &RectGrid) -> f64 {
        integrate2(&(a - b).mapv(|v| v * v), g).sqrt()
    }

    #[test]
    fn compatibility_examples() {
        let g = RectGrid::new(2.0, 3.0, 9, 13).unwrap();
        let zero = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.zeros(), Traces::zeros(&g)).unwrap();
        assert_eq!(compatibility_residual(&zero), 0.0);
        let one = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.sample(|_, _| 1.0), Traces::zeros(&g)).unwrap();
        assert!((compatibility_residual(&one) - 6.0).abs() < 1e-12);
        let t = Traces::from_fns(&g, |_| 0.0, |_| 0.0, |_| 2.0, |_| -3.0);
        let lin = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.sample(|_, _| -2.0), t).unwrap();
        assert!(compatibility_residual(&lin).abs() < 1e-12);
    }

    #[test]
    fn linear_fields_are_exact() {
        let g = RectGrid::new(2.0, 3.0, 17, 25).unwrap();
        let t = Traces::from_fns(&g, |_| 0.0, |_| 0.0, |_| 2.0, |_| -3.0);
        let prob = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.sample(|_, _| -2.0), t).unwrap();
        let (u1, u2) = solve_first_order_elliptic(&prob, &SolveOptions::default()).unwrap();
        assert!((&u1.values - &g.sample(|x, _| x)).iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-10);
        assert!((&u2.values - &g.sample(|_, y| -y)).iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-10);
    }

    #[test]
    fn constants_are_recovered() {
        let g = RectGrid::new(1.0, 1.0, 9, 9).unwrap();
        let t = Traces::from_fns(&g, |_| 0.7, |_| -1.2, |_| 0.7, |_| -1.2);
        let (v1, v2) = solve_cauchy_riemann(&g.zeros(), &g.zeros(), &t, &g, &SolveOptions::default()).unwrap();
        assert!(v1.iter().all(|v| (v - 0.7).abs() < 1e-12));
        assert!(v2.iter().all(|v| (v + 1.2).abs() < 1e-12));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = RectGrid::new(1.0, 1.0, 9, 9).unwrap();
        let prob = EllipticProblem::new(g, 3.0, 0.5, g.zeros(), g.zeros(), Traces::zeros(&g)).unwrap();
        let (u1, u2) = solve_first_order_elliptic(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(u1.max_abs() + u2.max_abs(), 0.0);
    }

    #[test]
    fn incompatible_data_is_an_error_unless_projected() {
        let g = RectGrid::new(1.0, 1.0, 9, 9).unwrap();
        let prob = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.sample(|_, _| 1.0), Traces::zeros(&g)).unwrap();
        assert!(matches!(
            solve_first_order_elliptic(&prob, &SolveOptions::default()),
            Err(Error::Solvability { .. })
        ));
        let mut t = Traces::zeros(&g);
        t.g4 = vec![1.0 - 1e-6; 9];
        let near = EllipticProblem::new(g, 1.0, 1.0, g.zeros(), g.sample(|_, _| 1.0), t).unwrap();
        let opts = SolveOptions { projection_tol: Some(1e-4), ..Default::default() };
        assert!(solve_first_order_elliptic(&near, &opts).is_ok());
        assert!(solve_first_order_elliptic(&near, &SolveOptions::default()).is_err());
    }

    #[test]
    fn potential_manufactured_order() {
        let (l1, l2v) = (1.0, 1.0);
        let err = |n: usize| {
            let g = RectGrid::new(l1, l2v, n, n).unwrap();
            let phi_x = |x: f64, y: f64| PI / l1 * (PI * x / l1).cos() * (PI * y / l2v).sin();
            let phi_y = |x: f64, y: f64| PI / l2v * (PI * x / l1).sin() * (PI * y / l2v).cos();
            let f1 = g.sample(|x, y| -PI * PI * (1.0 / (l1 * l1) + 1.0 / (l2v * l2v)) * (PI * x / l1).sin() * (PI * y / l2v).sin());
            let t = Traces::zeros(&g);
            let (v1, v2) = solve_cauchy_riemann(&f1, &g.zeros(), &t, &g, &SolveOptions::default()).unwrap();
            l2(&v1, &g.sample(phi_y), &g) + l2(&v2, &g.sample(phi_x), &g)
        };
        let (a, b, c) = (err(65), err(129), err(257));
        assert!((a / b).log2() >= 1.9 && (b / c).log2() >= 1.9, "{a} {b} {c}");
    }

    #[test]
    fn transform_commutes_with_direct_solve() {
        let g = RectGrid::new(1.0, 1.0, 17, 17).unwrap();
        let (a1, a2) = (4.0, 0.25);
        let f1 = g.sample(|x, y| x * y);
        let f2 = g.sample(|x, y| (x - 0.5) * (y - 0.3));
        let t = Traces::from_fns(&g, |y| y, |x| x * x, |y| 1.0 - y, |x| 0.1 * x);
        let mut prob = EllipticProblem::new(g, a1, a2, f1.clone(), f2.clone(), t.clone()).unwrap();
        let res = compatibility_residual(&prob);
        prob.f2 -= res / (g.l1 * g.l2);
        assert!(compatibility_residual(&prob).abs() < 1e-13);
        let (u1, u2) = solve_first_order_elliptic(&prob, &SolveOptions::default()).unwrap();
        let (s, r) = ((a1 * a2).sqrt(), (a2 / a1).sqrt());
        let gt = g.rescaled(1.0 / s, 1.0);
        let (v1, v2) = solve_cauchy_riemann(&f1.mapv(|v| v * r), &prob.f2, &t.scale_u1(r), &gt, &SolveOptions::default()).unwrap();
        assert!((&u1.values * r - &v1).iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-14);
        assert!((&u2.values - &v2).iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-14);
    }
}
