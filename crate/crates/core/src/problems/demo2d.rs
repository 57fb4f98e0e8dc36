//! Nonlinear Poisson problem `-Δu + u^3 = s` on the unit square with zero
//! Dirichlet data. The source is manufactured so that
//! `u*(x, y) = sin(πx) sin(πy)` solves the continuous problem:
//! `s = 2π² u* + u*³`.
//!
//! Discretized with the 5-point Laplacian on an `ni x nj` interior grid.

use std::f64::consts::PI;

use crate::{GridMap, LayeredIndexSet, NonlinearProblem, Result};

#[derive(Debug, Clone)]
pub struct NonlinearPoisson2D {
    grid: GridMap,
    inv_hx2: f64,
    inv_hy2: f64,
    hx: f64,
    hy: f64,
    source: Vec<f64>,
}

impl NonlinearPoisson2D {
    pub fn new(ni: usize, nj: usize) -> Result<Self> {
        let grid = GridMap::plane(ni, nj)?;
        let hx = 1.0 / (ni as f64 + 1.0);
        let hy = 1.0 / (nj as f64 + 1.0);
        let mut p = Self {
            grid,
            inv_hx2: 1.0 / (hx * hx),
            inv_hy2: 1.0 / (hy * hy),
            hx,
            hy,
            source: Vec::new(),
        };
        p.source = (0..grid.len())
            .map(|k| {
                let (x, y) = p.node_xy(k);
                let u = Self::manufactured(x, y);
                2.0 * PI * PI * u + u * u * u
            })
            .collect();
        Ok(p)
    }

    /// Square `n x n` interior grid.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn manufactured(x: f64, y: f64) -> f64 {
        (PI * x).sin() * (PI * y).sin()
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn node_xy(&self, index: usize) -> (f64, f64) {
        let (i, j, _) = self.grid.coords(index);
        ((i as f64 + 1.0) * self.hx, (j as f64 + 1.0) * self.hy)
    }

    #[inline]
    fn kernel(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let ni = self.grid.ni();
        let nj = self.grid.nj();
        let k = j * ni + i;
        let c = u[k];
        let w = if i > 0 { u[k - 1] } else { 0.0 };
        let e = if i + 1 < ni { u[k + 1] } else { 0.0 };
        let s = if j > 0 { u[k - ni] } else { 0.0 };
        let n = if j + 1 < nj { u[k + ni] } else { 0.0 };
        (2.0 * c - w - e) * self.inv_hx2 + (2.0 * c - s - n) * self.inv_hy2 + c * c * c
            - self.source[k]
    }
}

impl NonlinearProblem for NonlinearPoisson2D {
    fn grid(&self) -> GridMap {
        self.grid
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        let ni = self.grid.ni();
        for j in 0..self.grid.nj() {
            for i in 0..ni {
                out[j * ni + i] = self.kernel(x, i, j);
            }
        }
    }

    fn eval_reduced(&self, x: &[f64], set: &LayeredIndexSet, out: &mut [f64]) {
        let mut k = 0;
        for row in set.rows() {
            for &i in &row.cols {
                out[k] = self.kernel(x, i, row.j);
                k += 1;
            }
        }
    }

    fn exact_solution(&self) -> Option<Vec<f64>> {
        Some(
            (0..self.grid.len())
                .map(|k| {
                    let (x, y) = self.node_xy(k);
                    Self::manufactured(x, y)
                })
                .collect(),
        )
    }
}
