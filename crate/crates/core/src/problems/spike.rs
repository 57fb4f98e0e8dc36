//! Two-point boundary-value problem with a sharp spike at `x = 0.5`:
//!
//! ```text
//! -u'' + u^3 + (4e8 (x - 0.5)^2 - 2e4) u - 1e9 exp(-3 ((x - 0.5) / 0.01)^2) = 0
//! u(0) = u(1) = 0
//! ```
//!
//! with exact solution `u(x) = 1e3 exp(-((x - 0.5) / 0.01)^2)`. Substituting
//! it back, `u^3` cancels the exponential source and `-u''` cancels the
//! quadratic coefficient term.
//!
//! Discretized with second-order central differences on `n` interior nodes,
//! `h = 1 / (n + 1)`, `x_i = i h` for `i = 1..=n` (1-based). The Dirichlet
//! values are folded into the stencil.

use crate::{Error, GridMap, LayeredIndexSet, NonlinearProblem, Result};

const PEAK: f64 = 1e3;
const WIDTH: f64 = 0.01;

pub fn spike_exact(x: f64) -> f64 {
    let s = (x - 0.5) / WIDTH;
    PEAK * (-s * s).exp()
}

#[derive(Debug, Clone)]
pub struct SpikeBvp1D {
    n: usize,
    h: f64,
    inv_h2: f64,
    coeff: Vec<f64>,
    source: Vec<f64>,
}

impl SpikeBvp1D {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid {
                ni: 0,
                nj: 1,
                dof: 1,
            });
        }
        let h = 1.0 / (n as f64 + 1.0);
        let xs = (1..=n).map(|i| i as f64 * h);
        let (coeff, source) = xs
            .map(|x| {
                let d = x - 0.5;
                let s = d / WIDTH;
                (4e8 * d * d - 2e4, 1e9 * (-3.0 * s * s).exp())
            })
            .unzip();
        Ok(Self {
            n,
            h,
            inv_h2: 1.0 / (h * h),
            coeff,
            source,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of 0-based unknown `i`.
    pub fn node_x(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.h
    }

    #[inline]
    fn kernel(&self, u: &[f64], i: usize) -> f64 {
        let ui = u[i];
        let left = if i > 0 { u[i - 1] } else { 0.0 };
        let right = if i + 1 < self.n { u[i + 1] } else { 0.0 };
        (2.0 * ui - left - right) * self.inv_h2 + ui * ui * ui + self.coeff[i] * ui - self.source[i]
    }
}

impl NonlinearProblem for SpikeBvp1D {
    fn grid(&self) -> GridMap {
        GridMap::line(self.n).expect("n >= 1")
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.kernel(x, i);
        }
    }

    fn eval_reduced(&self, x: &[f64], set: &LayeredIndexSet, out: &mut [f64]) {
        let mut k = 0;
        for row in set.rows() {
            for &i in &row.cols {
                out[k] = self.kernel(x, i);
                k += 1;
            }
        }
    }

    fn exact_solution(&self) -> Option<Vec<f64>> {
        Some((0..self.n).map(|i| spike_exact(self.node_x(i))).collect())
    }
}
