//! # setnewton
//!
//! Matrix-free inexact Newton-GMRES for discretized nonlinear systems, with
//! runtime active-set reduction.
//!
//! During a Newton solve some unknowns settle long before others. This crate
//! selects the unknowns whose local residual is still large, freezes the rest,
//! and continues Newton iterations on the smaller *local set*. The full
//! iterate is never rebuilt: reduced updates are scattered back through the
//! set's absolute-index vector (`set_vec`).
//!
//! The pieces, bottom-up:
//!
//! * [`indexset`] -- the flag/absolute/relative layered index set, the per-row
//!   set tree and gather/scatter between global and reduced vectors.
//! * [`setrules`] -- residual and step-size based selection rules.
//! * [`problems`] -- the [`NonlinearProblem`] contract plus the shipped 1D spike
//!   boundary-value problem and a 2D nonlinear Poisson demo.
//! * [`krylov`] -- directional-difference Jacobian-vector products and
//!   restarted GMRES.
//! * [`newton`] -- inexact Newton with Eisenstat-Walker forcing and
//!   backtracking, over an arbitrary index set.
//! * [`driver`] -- the set algorithm, its single-series variant and the plain
//!   Newton baseline.
//! * [`cli`] -- JSON run configurations and CSV/JSON reports; backs the
//!   `setnewton` binary.
//!
//! ```
//! use setnewton::driver::{plain_newton, set_algorithm, SetSolveConfig};
//! use setnewton::newton::NewtonConfig;
//! use setnewton::problems::SpikeBvp1D;
//! use setnewton::setrules::{RuleConfig, RuleKind};
//!
//! let problem = SpikeBvp1D::new(100).unwrap();
//! let x0 = vec![0.0; 100];
//!
//! let baseline = plain_newton(&problem, &x0, &NewtonConfig::default()).unwrap();
//! assert!(baseline.status.is_converged());
//!
//! let cfg = SetSolveConfig {
//!     rule: RuleConfig::new(RuleKind::ResidualMean, 0.01),
//!     ..SetSolveConfig::default()
//! };
//! let reduced = set_algorithm(&problem, &x0, &cfg).unwrap();
//! assert!(reduced.status.is_converged());
//! assert!(reduced.set_size_trace[0] < 100);
//! ```

pub mod cli;
pub mod driver;
mod error;
pub mod indexset;
pub mod krylov;
pub mod newton;
pub mod problems;
pub mod setrules;

pub use error::{Error, Result};
pub use indexset::{GridMap, LayeredIndexSet};
pub use problems::NonlinearProblem;

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
