//! Five-point Poisson solves on a rectangle by exact diagonalization of the 1-D operators.
//!
//! Dirichlet rows are identities and the interior block is diagonalized by discrete sine
//! vectors. Neumann boundaries use the ghost-node closure, whose 1-D operator is
//! diagonalized by discrete cosine vectors under trapezoid weights; the constant mode
//! carries the discrete compatibility defect and is pinned to a zero trapezoid mean.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::grid::{integrate2, trapezoid_weights, RectGrid};

/// Boundary data, ordered as (x₁ = 0, x₂ = 0, x₁ = ℓ₁, x₂ = ℓ₂); left/right have n₂ samples,
/// bottom/top have n₁ samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    pub left: Vec<f64>,
    pub bottom: Vec<f64>,
    pub right: Vec<f64>,
    pub top: Vec<f64>,
}

impl EdgeData {
    pub fn zeros(grid: &RectGrid) -> Self {
        Self { left: vec![0.0; grid.n2], bottom: vec![0.0; grid.n1], right: vec![0.0; grid.n2], top: vec![0.0; grid.n1] }
    }

    fn check(&self, grid: &RectGrid) -> Result<()> {
        if self.left.len() != grid.n2 || self.right.len() != grid.n2 || self.bottom.len() != grid.n1 || self.top.len() != grid.n1
        {
            return Err(Error::Domain("edge data lengths do not match the grid".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PoissonBc {
    /// Prescribed values.
    Dirichlet(EdgeData),
    /// Prescribed outward normal derivatives.
    Neumann(EdgeData),
}

fn sine_basis(n: usize) -> (Array2<f64>, Vec<f64>) {
    let m = n - 2;
    let big = (n - 1) as f64;
    let pi = std::f64::consts::PI;
    let s = Array2::from_shape_fn((m, m), |(k, j)| (pi * (k + 1) as f64 * (j + 1) as f64 / big).sin());
    let lam = (0..m).map(|k| 2.0 * (pi * (k + 1) as f64 / big).cos() - 2.0).collect();
    (s, lam)
}

fn cosine_basis(n: usize) -> (Array2<f64>, Array2<f64>, Vec<f64>) {
    let big = (n - 1) as f64;
    let pi = std::f64::consts::PI;
    let w = trapezoid_weights(n, 1.0);
    let forward = Array2::from_shape_fn((n, n), |(k, j)| w[j] * (pi * (k * j) as f64 / big).cos());
    let inverse = Array2::from_shape_fn((n, n), |(j, k)| {
        let d = if k == 0 || k == n - 1 { big } else { 0.5 * big };
        (pi * (k * j) as f64 / big).cos() / d
    });
    let lam = (0..n).map(|k| 2.0 * (pi * k as f64 / big).cos() - 2.0).collect();
    (forward, inverse, lam)
}

/// Solves Δu = rhs with the given boundary conditions; Neumann data must be compatible to
/// a relative tolerance of 10⁻⁸.
pub fn poisson_solve(bc: &PoissonBc, rhs: &Array2<f64>, grid: &RectGrid) -> Result<Array2<f64>> {
    match bc {
        PoissonBc::Dirichlet(d) => dirichlet(d, rhs, grid),
        PoissonBc::Neumann(fl) => {
            let (res, scale) = neumann_defect(fl, rhs, grid)?;
            let tol = 1e-8 * scale.max(f64::MIN_POSITIVE);
            if res.abs() > tol {
                return Err(Error::Solvability { residual: res, tolerance: tol });
            }
            neumann(fl, rhs, grid)
        }
    }
}

fn dirichlet(d: &EdgeData, rhs: &Array2<f64>, grid: &RectGrid) -> Result<Array2<f64>> {
    d.check(grid)?;
    let (n1, n2) = (grid.n1, grid.n2);
    let (h1, h2) = (grid.h1(), grid.h2());
    let mut u = Array2::zeros((n1, n2));
    for j in 0..n2 {
        u[[0, j]] = d.left[j];
        u[[n1 - 1, j]] = d.right[j];
    }
    for i in 0..n1 {
        u[[i, 0]] = d.bottom[i];
        u[[i, n2 - 1]] = d.top[i];
    }
    let mut b = rhs.slice(s![1..n1 - 1, 1..n2 - 1]).to_owned();
    for j in 1..n2 - 1 {
        b[[0, j - 1]] -= u[[0, j]] / (h1 * h1);
        b[[n1 - 3, j - 1]] -= u[[n1 - 1, j]] / (h1 * h1);
    }
    for i in 1..n1 - 1 {
        b[[i - 1, 0]] -= u[[i, 0]] / (h2 * h2);
        b[[i - 1, n2 - 3]] -= u[[i, n2 - 1]] / (h2 * h2);
    }
    let (s1, l1) = sine_basis(n1);
    let (s2, l2) = sine_basis(n2);
    let mut hat = s1.dot(&b).dot(&s2);
    for ((k, m), v) in hat.indexed_iter_mut() {
        *v /= l1[k] / (h1 * h1) + l2[m] / (h2 * h2);
    }
    let norm = 4.0 / (((n1 - 1) * (n2 - 1)) as f64);
    let interior = s1.dot(&hat).dot(&s2) * norm;
    u.slice_mut(s![1..n1 - 1, 1..n2 - 1]).assign(&interior);
    Ok(u)
}

fn neumann_rhs(fl: &EdgeData, rhs: &Array2<f64>, grid: &RectGrid) -> Result<Array2<f64>> {
    fl.check(grid)?;
    let (n1, n2) = (grid.n1, grid.n2);
    let (h1, h2) = (grid.h1(), grid.h2());
    let mut b = rhs.clone();
    for j in 0..n2 {
        b[[0, j]] -= 2.0 * fl.left[j] / h1;
        b[[n1 - 1, j]] -= 2.0 * fl.right[j] / h1;
    }
    for i in 0..n1 {
        b[[i, 0]] -= 2.0 * fl.bottom[i] / h2;
        b[[i, n2 - 1]] -= 2.0 * fl.top[i] / h2;
    }
    Ok(b)
}

/// Discrete compatibility defect ∫rhs − ∮flux (trapezoid) and its magnitude scale.
pub fn neumann_defect(fl: &EdgeData, rhs: &Array2<f64>, grid: &RectGrid) -> Result<(f64, f64)> {
    let b = neumann_rhs(fl, rhs, grid)?;
    let abs_scale = {
        let abs_b = neumann_rhs(
            &EdgeData {
                left: fl.left.iter().map(|v| -v.abs()).collect(),
                bottom: fl.bottom.iter().map(|v| -v.abs()).collect(),
                right: fl.right.iter().map(|v| -v.abs()).collect(),
                top: fl.top.iter().map(|v| -v.abs()).collect(),
            },
            &rhs.mapv(f64::abs),
            grid,
        )?;
        integrate2(&abs_b, grid)
    };
    Ok((integrate2(&b, grid), abs_scale))
}

/// Neumann solve with the constant mode dropped (the defect is projected out).
pub(crate) fn neumann(fl: &EdgeData, rhs: &Array2<f64>, grid: &RectGrid) -> Result<Array2<f64>> {
    let b = neumann_rhs(fl, rhs, grid)?;
    let (h1, h2) = (grid.h1(), grid.h2());
    let (f1, i1, l1) = cosine_basis(grid.n1);
    let (f2, i2, l2) = cosine_basis(grid.n2);
    let mut hat = f1.dot(&b).dot(&f2.t());
    for ((k, m), v) in hat.indexed_iter_mut() {
        if k == 0 && m == 0 {
            *v = 0.0;
        } else {
            *v /= l1[k] / (h1 * h1) + l2[m] / (h2 * h2);
        }
    }
    Ok(i1.dot(&hat).dot(&i2.t()))
}

/// Solves Δu = rhs with values on x₁ = 0, ℓ₁ (`left`, `right`) and outward normal
/// derivatives on x₂ = 0, ℓ₂ (`bottom`, `top`). The problem is always uniquely solvable.
pub fn solve_mixed(
    left: &[f64],
    right: &[f64],
    bottom: &[f64],
    top: &[f64],
    rhs: &Array2<f64>,
    grid: &RectGrid,
) -> Result<Array2<f64>> {
    let (n1, n2) = (grid.n1, grid.n2);
    if left.len() != n2 || right.len() != n2 || bottom.len() != n1 || top.len() != n1 || rhs.dim() != (n1, n2) {
        return Err(Error::Domain("mixed problem data do not match the grid".into()));
    }
    let (h1, h2) = (grid.h1(), grid.h2());
    let mut b = rhs.slice(s![1..n1 - 1, ..]).to_owned();
    for i in 1..n1 - 1 {
        b[[i - 1, 0]] -= 2.0 * bottom[i] / h2;
        b[[i - 1, n2 - 1]] -= 2.0 * top[i] / h2;
    }
    for j in 0..n2 {
        b[[0, j]] -= left[j] / (h1 * h1);
        b[[n1 - 3, j]] -= right[j] / (h1 * h1);
    }
    let (s1, l1) = sine_basis(n1);
    let (f2, i2, l2) = cosine_basis(n2);
    let mut hat = s1.dot(&b).dot(&f2.t());
    for ((k, m), v) in hat.indexed_iter_mut() {
        *v /= l1[k] / (h1 * h1) + l2[m] / (h2 * h2);
    }
    let interior = s1.dot(&hat).dot(&i2.t()) * (2.0 / (n1 - 1) as f64);
    let mut u = Array2::zeros((n1, n2));
    u.slice_mut(s![1..n1 - 1, ..]).assign(&interior);
    for j in 0..n2 {
        u[[0, j]] = left[j];
        u[[n1 - 1, j]] = right[j];
    }
    Ok(u)
}

/// Applies the five-point operator with the same closures, returning the residual Au − b at
/// every non-Dirichlet node.
pub fn operator_residual(bc: &PoissonBc, u: &Array2<f64>, rhs: &Array2<f64>, grid: &RectGrid) -> Array2<f64> {
    let (n1, n2) = (grid.n1, grid.n2);
    let (h1, h2) = (grid.h1(), grid.h2());
    let mut r = Array2::zeros((n1, n2));
    let neumann = matches!(bc, PoissonBc::Neumann(_));
    let get = |i: isize, j: isize, u: &Array2<f64>| -> f64 {
        let ii = if i < 0 { 1 } else if i >= n1 as isize { n1 as isize - 2 } else { i } as usize;
        let jj = if j < 0 { 1 } else if j >= n2 as isize { n2 as isize - 2 } else { j } as usize;
        u[[ii, jj]]
    };
    let b = match bc {
        PoissonBc::Neumann(fl) => neumann_rhs(fl, rhs, grid).unwrap(),
        PoissonBc::Dirichlet(_) => rhs.clone(),
    };
    for i in 0..n1 {
        for j in 0..n2 {
            let boundary = i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1;
            if boundary && !neumann {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let lap = (get(ii - 1, jj, u) - 2.0 * u[[i, j]] + get(ii + 1, jj, u)) / (h1 * h1)
                + (get(ii, jj - 1, u) - 2.0 * u[[i, j]] + get(ii, jj + 1, u)) / (h2 * h2);
            r[[i, j]] = lap - b[[i, j]];
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn l2_error(a: &Array2<f64>, b: &Array2<f64>, grid: &RectGrid) -> f64 {
        integrate2(&(a - b).mapv(|v| v * v), grid).sqrt()
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = RectGrid::new(1.0, 1.0, 9, 7).unwrap();
        let u = poisson_solve(&PoissonBc::Dirichlet(EdgeData::zeros(&g)), &g.zeros(), &g).unwrap();
        assert_eq!(u.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);
    }

    #[test]
    fn dirichlet_solution_satisfies_the_stencil() {
        let g = RectGrid::new(2.0, 1.0, 33, 17).unwrap();
        let rhs = g.sample(|x, y| (3.0 * x).sin() * y + x * x);
        let mut d = EdgeData::zeros(&g);
        d.left = g.x2_nodes().iter().map(|y| y * y).collect();
        d.top = g.x1_nodes().iter().map(|x| 1.0 + x).collect();
        let bc = PoissonBc::Dirichlet(d);
        let u = poisson_solve(&bc, &rhs, &g).unwrap();
        let r = operator_residual(&bc, &u, &rhs, &g);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0 / (g.h1() * g.h1());
        assert!(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-12 * scale);
        assert_eq!(u[[0, 5]], g.x2(5) * g.x2(5));
    }

    #[test]
    fn neumann_solution_satisfies_the_stencil_and_has_zero_mean() {
        let g = RectGrid::new(1.0, 2.0, 21, 31).unwrap();
        let rhs = g.sample(|x, y| (PI * x).cos() * (0.5 * PI * y).cos() + 0.3 * x - 0.15);
        let mut fl = EdgeData::zeros(&g);
        fl.top = g.x1_nodes().iter().map(|x| (x - 0.5) * 0.2).collect();
        let bc = PoissonBc::Neumann(fl);
        let u = poisson_solve(&bc, &rhs, &g).unwrap();
        let r = operator_residual(&bc, &u, &rhs, &g);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0 / (g.h1() * g.h1());
        assert!(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-12 * scale);
        assert!(integrate2(&u, &g).abs() < 1e-12);
    }

    #[test]
    fn incompatible_neumann_data_is_rejected() {
        let g = RectGrid::new(1.0, 1.0, 9, 9).unwrap();
        let rhs = g.sample(|_, _| 1.0);
        let err = poisson_solve(&PoissonBc::Neumann(EdgeData::zeros(&g)), &rhs, &g).unwrap_err();
        match err {
            Error::Solvability { residual, .. } => assert!((residual - 1.0).abs() < 1e-12),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn manufactured_orders() {
        let (l1, l2) = (1.5, 1.0);
        let dir = |n: usize| {
            let g = RectGrid::new(l1, l2, 2 * n - 1, n).unwrap();
            let exact = g.sample(|x, y| x * y * (l1 - x) * (l2 - y) * (x + y).exp());
            let rhs = g.sample(|x, y| {
                let e = (x + y).exp();
                let a = x * (l1 - x);
                let b = y * (l2 - y);
                let (da, dda) = (l1 - 2.0 * x, -2.0);
                let (db, ddb) = (l2 - 2.0 * y, -2.0);
                e * ((dda + 2.0 * da + a) * b + (ddb + 2.0 * db + b) * a)
            });
            let u = poisson_solve(&PoissonBc::Dirichlet(EdgeData::zeros(&g)), &rhs, &g).unwrap();
            l2_error(&u, &exact, &g)
        };
        let neu = |n: usize| {
            let g = RectGrid::new(l1, l2, 2 * n - 1, n).unwrap();
            let f = |x: f64, y: f64| (PI * x / l1).cos() * (PI * y / l2).cos();
            let exact = g.sample(f);
            let rhs = g.sample(|x, y| -PI * PI * (1.0 / (l1 * l1) + 1.0 / (l2 * l2)) * f(x, y));
            let u = poisson_solve(&PoissonBc::Neumann(EdgeData::zeros(&g)), &rhs, &g).unwrap();
            let mean = integrate2(&u, &g) / (l1 * l2);
            assert!(mean.abs() < 1e-13);
            l2_error(&u, &exact, &g)
        };
        for solve in [&dir as &dyn Fn(usize) -> f64, &neu] {
            let (e1, e2, e3) = (solve(17), solve(33), solve(65));
            let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
            assert!(o1 >= 1.9 && o2 >= 1.9, "orders {o1} {o2}");
        }
    }

    #[test]
    fn mixed_problem_is_second_order() {
        let (l1, l2) = (1.5, 1.0);
        let u = |x: f64, y: f64| (2.0 * x).sin() * y.cosh() + x * y * y;
        let err = |n: usize| {
            let g = RectGrid::new(l1, l2, n, n).unwrap();
            let rhs = g.sample(|x, y| -3.0 * (2.0 * x).sin() * y.cosh() + 2.0 * x);
            let uy = |x: f64, y: f64| (2.0 * x).sin() * y.sinh() + 2.0 * x * y;
            let xs = g.x1_nodes();
            let ys = g.x2_nodes();
            let left: Vec<f64> = ys.iter().map(|&y| u(0.0, y)).collect();
            let right: Vec<f64> = ys.iter().map(|&y| u(l1, y)).collect();
            let bottom: Vec<f64> = xs.iter().map(|&x| -uy(x, 0.0)).collect();
            let top: Vec<f64> = xs.iter().map(|&x| uy(x, l2)).collect();
            let sol = solve_mixed(&left, &right, &bottom, &top, &rhs, &g).unwrap();
            assert_eq!(sol[[0, 3]], left[3]);
            l2_error(&sol, &g.sample(u), &g)
        };
        let (a, b, c) = (err(17), err(33), err(65));
        assert!((a / b).log2() >= 1.9 && (b / c).log2() >= 1.9, "{a} {b} {c}");
    }
}
