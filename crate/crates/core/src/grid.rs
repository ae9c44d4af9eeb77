//! Uniform rectangular grids, node fields, differences and cubic interpolation.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform node grid on [x0, x0+ℓ₁] × [y0, y0+ℓ₂]; node (i, j) sits at (x0 + i h₁, y0 + j h₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectGrid {
    pub x0: f64,
    pub y0: f64,
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl RectGrid {
    pub fn new(l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        Self::with_origin(0.0, 0.0, l1, l2, n1, n2)
    }

    pub fn with_origin(x0: f64, y0: f64, l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 3 || n2 < 3 {
            return Err(Error::Domain(format!("grid needs at least 3x3 nodes (got {n1}x{n2})")));
        }
        if !(l1 > 0.0 && l2 > 0.0) {
            return Err(Error::Domain(format!("grid extents must be positive (got {l1}, {l2})")));
        }
        Ok(Self { x0, y0, l1, l2, n1, n2 })
    }

    pub fn h1(&self) -> f64 {
        self.l1 / (self.n1 - 1) as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / (self.n2 - 1) as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h2()
    }

    pub fn x1_nodes(&self) -> Vec<f64> {
        (0..self.n1).map(|i| self.x1(i)).collect()
    }

    pub fn x2_nodes(&self) -> Vec<f64> {
        (0..self.n2).map(|j| self.x2(j)).collect()
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros((self.n1, self.n2))
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Array2<f64> {
        Array2::from_shape_fn((self.n1, self.n2), |(i, j)| f(self.x1(i), self.x2(j)))
    }

    /// Same node counts, rescaled extents.
    pub fn rescaled(&self, s1: f64, s2: f64) -> Self {
        Self { x0: self.x0 * s1, y0: self.y0 * s2, l1: self.l1 * s1, l2: self.l2 * s2, ..*self }
    }
}

/// Values at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub grid: RectGrid,
    pub values: Array2<f64>,
}

impl ScalarField2D {
    pub fn new(grid: RectGrid, values: Array2<f64>) -> Self {
        assert_eq!(values.dim(), (grid.n1, grid.n2));
        Self { grid, values }
    }

    pub fn zeros(grid: RectGrid) -> Self {
        Self { grid, values: grid.zeros() }
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(grid: RectGrid, f: F) -> Self {
        Self { grid, values: grid.sample(f) }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bicubic interpolation at a physical point.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        interpolate2(&self.values, &self.grid, x, y)
    }
}

/// Second-order first difference along an equally spaced sequence.
pub fn diff1(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            d[0] = (v[1] - v[0]) / h;
            d[1] = d[0];
        }
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d
}

/// ∂/∂x₁ of a node array.
pub fn d_dx1(a: &Array2<f64>, h: f64) -> Array2<f64> {
    let mut out = Array2::zeros(a.dim());
    for (j, col) in a.columns().into_iter().enumerate() {
        let v: Vec<f64> = col.to_vec();
        for (i, d) in diff1(&v, h).into_iter().enumerate() {
            out[[i, j]] = d;
        }
    }
    out
}

/// ∂/∂x₂ of a node array.
pub fn d_dx2(a: &Array2<f64>, h: f64) -> Array2<f64> {
    let mut out = Array2::zeros(a.dim());
    for (i, row) in a.rows().into_iter().enumerate() {
        let v: Vec<f64> = row.to_vec();
        for (j, d) in diff1(&v, h).into_iter().enumerate() {
            out[[i, j]] = d;
        }
    }
    out
}

/// Four-point Lagrange stencil on a uniform axis: returns the first node index and weights.
pub fn cubic_stencil(x0: f64, h: f64, n: usize, x: f64) -> (usize, [f64; 4]) {
    let t = (x - x0) / h;
    let k = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
    let start = k.saturating_sub(1).min(n.saturating_sub(4));
    let s = t - start as f64;
    let w = [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ];
    (start, w)
}

/// Cubic interpolation of equally spaced samples.
pub fn interpolate1(v: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let (s, w) = cubic_stencil(x0, h, v.len(), x);
    (0..4).map(|k| w[k] * v[s + k]).sum()
}

/// Tensor-product cubic interpolation on a grid.
pub fn interpolate2(a: &Array2<f64>, grid: &RectGrid, x: f64, y: f64) -> f64 {
    let (si, wi) = cubic_stencil(grid.x0, grid.h1(), grid.n1, x);
    let (sj, wj) = cubic_stencil(grid.y0, grid.h2(), grid.n2, y);
    let mut acc = 0.0;
    for a_i in 0..4 {
        let mut row = 0.0;
        for b_j in 0..4 {
            row += wj[b_j] * a[[si + a_i, sj + b_j]];
        }
        acc += wi[a_i] * row;
    }
    acc
}

/// Trapezoid weights on a uniform axis.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Trapezoid integral of a node array over the grid.
pub fn integrate2(a: &Array2<f64>, grid: &RectGrid) -> f64 {
    let w1 = trapezoid_weights(grid.n1, grid.h1());
    let w2 = trapezoid_weights(grid.n2, grid.h2());
    let mut s = 0.0;
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            s += w1[i] * w2[j] * a[[i, j]];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = RectGrid::with_origin(0.5, -1.0, 2.0, 1.0, 9, 5).unwrap();
        let f = |x: f64, y: f64| x * x * x - 2.0 * x * y * y + y * y * y + 1.0;
        let a = g.sample(f);
        for (x, y) in [(0.5, -1.0), (0.77, -0.31), (2.5, 0.0), (2.41, -0.99), (1.0, -0.5)] {
            assert!((interpolate2(&a, &g, x, y) - f(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn differences_are_exact_for_quadratics() {
        let g = RectGrid::new(1.0, 2.0, 6, 7).unwrap();
        let a = g.sample(|x, y| x * x + 3.0 * x * y - y * y);
        let dx = d_dx1(&a, g.h1());
        let dy = d_dx2(&a, g.h2());
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let (x, y) = (g.x1(i), g.x2(j));
                assert!((dx[[i, j]] - (2.0 * x + 3.0 * y)).abs() < 1e-12);
                assert!((dy[[i, j]] - (3.0 * x - 2.0 * y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trapezoid_integrates_bilinear_exactly() {
        let g = RectGrid::new(2.0, 3.0, 5, 4).unwrap();
        let a = g.sample(|x, y| 1.0 + x * y);
        assert!((integrate2(&a, &g) - (6.0 + 9.0)).abs() < 1e-12);
    }
}
