//! The four state fields (p, θ, q, S) on a grid.

use std::io::Write;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gas::FlowState;
use crate::grid::{interpolate2, RectGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct StateFields {
    pub grid: RectGrid,
    pub p: Array2<f64>,
    pub theta: Array2<f64>,
    pub q: Array2<f64>,
    pub s: Array2<f64>,
}

impl StateFields {
    pub fn zeros(grid: RectGrid) -> Self {
        Self { grid, p: grid.zeros(), theta: grid.zeros(), q: grid.zeros(), s: grid.zeros() }
    }

    pub fn uniform(grid: RectGrid, u: &FlowState) -> Self {
        let f = |v: f64| Array2::from_elem((grid.n1, grid.n2), v);
        Self { grid, p: f(u.p), theta: f(u.theta), q: f(u.q), s: f(u.s) }
    }

    pub fn at(&self, i: usize, j: usize) -> FlowState {
        FlowState::new(self.p[[i, j]], self.theta[[i, j]], self.q[[i, j]], self.s[[i, j]])
    }

    pub fn set(&mut self, i: usize, j: usize, u: &FlowState) {
        self.p[[i, j]] = u.p;
        self.theta[[i, j]] = u.theta;
        self.q[[i, j]] = u.q;
        self.s[[i, j]] = u.s;
    }

    pub fn column(&self, i: usize) -> Vec<FlowState> {
        (0..self.grid.n2).map(|j| self.at(i, j)).collect()
    }

    pub fn interpolate(&self, x: f64, y: f64) -> FlowState {
        FlowState::new(
            interpolate2(&self.p, &self.grid, x, y),
            interpolate2(&self.theta, &self.grid, x, y),
            interpolate2(&self.q, &self.grid, x, y),
            interpolate2(&self.s, &self.grid, x, y),
        )
    }

    pub fn components(&self) -> [&Array2<f64>; 4] {
        [&self.p, &self.theta, &self.q, &self.s]
    }

    pub fn map2(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let z = |a: &Array2<f64>, b: &Array2<f64>| ndarray::Zip::from(a).and(b).map_collect(|&x, &y| f(x, y));
        Self {
            grid: self.grid,
            p: z(&self.p, &other.p),
            theta: z(&self.theta, &other.theta),
            q: z(&self.q, &other.q),
            s: z(&self.s, &other.s),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            grid: self.grid,
            p: &self.p * k,
            theta: &self.theta * k,
            q: &self.q * k,
            s: &self.s * k,
        }
    }

    /// Largest absolute entry over all four components.
    pub fn max_abs(&self) -> f64 {
        self.components().iter().flat_map(|a| a.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `xi,eta,p,theta,q,s` rows with round-trip precision; `coords` overrides the
    /// first coordinate per node when given.
    pub fn write_csv<W: Write>(&self, out: &mut W, coords: Option<&Array2<f64>>) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        out.write_all(b"xi,eta,p,theta,q,s\n").map_err(io)?;
        for i in 0..self.grid.n1 {
            for j in 0..self.grid.n2 {
                let x = coords.map_or(self.grid.x1(i), |c| c[[i, j]]);
                writeln!(
                    out,
                    "{:e},{:e},{:e},{:e},{:e},{:e}",
                    x,
                    self.grid.x2(j),
                    self.p[[i, j]],
                    self.theta[[i, j]],
                    self.q[[i, j]],
                    self.s[[i, j]]
                )
                .map_err(io)?;
            }
        }
        Ok(())
    }
}
