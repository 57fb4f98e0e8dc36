//! Discretized nonlinear systems.
//!
//! A problem evaluates its residual either on every unknown or on the members
//! of a [`LayeredIndexSet`] only. The reduced evaluation walks the set tree
//! and reads neighbours from the full iterate, so frozen unknowns enter the
//! stencils as constants. Both paths must agree with each other:
//! `residual_reduced(x, s) == s.gather(&residual_full(x))`.

mod demo2d;
mod linear;
mod spike;

pub use demo2d::NonlinearPoisson2D;
pub use linear::LinearSystem;
pub use spike::{spike_exact, SpikeBvp1D};

use crate::{check_len, Error, GridMap, LayeredIndexSet, Result};

pub trait NonlinearProblem {
    fn grid(&self) -> GridMap;

    /// Residual on every unknown. `x` and `out` have length `grid().len()`.
    fn eval_full(&self, x: &[f64], out: &mut [f64]);

    /// Residual on the members of `set`, in set order. `out` has length
    /// `set.len()`.
    fn eval_reduced(&self, x: &[f64], set: &LayeredIndexSet, out: &mut [f64]);

    /// Exact solution sampled at the unknowns, when known.
    fn exact_solution(&self) -> Option<Vec<f64>> {
        None
    }

    fn dim(&self) -> usize {
        self.grid().len()
    }

    fn residual_full(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.eval_full(x, &mut out);
        Ok(out)
    }

    fn residual_reduced(&self, x: &[f64], set: &LayeredIndexSet) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        if set.grid() != self.grid() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: set.grid().len(),
            });
        }
        let mut out = vec![0.0; set.len()];
        self.eval_reduced(x, set, &mut out);
        Ok(out)
    }
}

impl<P: NonlinearProblem + ?Sized> NonlinearProblem for &P {
    fn grid(&self) -> GridMap {
        (**self).grid()
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval_full(x, out)
    }

    fn eval_reduced(&self, x: &[f64], set: &LayeredIndexSet, out: &mut [f64]) {
        (**self).eval_reduced(x, set, out)
    }

    fn exact_solution(&self) -> Option<Vec<f64>> {
        (**self).exact_solution()
    }
}
