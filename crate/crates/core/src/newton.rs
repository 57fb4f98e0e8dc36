//! Inexact Newton iteration restricted to a [`LayeredIndexSet`].
//!
//! Each step solves `J[S,S] dx = -f_S` with matrix-free GMRES to the forcing
//! tolerance `eta`, damps the step by backtracking, and scatters
//! `x[set_vec] += lambda dx`. Unknowns outside the set are never written.

use serde::Serialize;

use crate::krylov::{gmres_solve, GmresConfig, JfnkOperator};
use crate::{check_len, norm2, Error, LayeredIndexSet, NonlinearProblem, Result};

/// Eisenstat-Walker (choice 2) forcing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingConfig {
    pub eta0: f64,
    pub gamma: f64,
    pub exponent: f64,
    pub eta_max: f64,
    pub eta_min: f64,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            eta0: 0.9,
            gamma: 0.9,
            exponent: 2.0,
            eta_max: 0.9,
            eta_min: 1e-6,
        }
    }
}

/// Armijo backtracking on `|f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    pub armijo_c: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    pub lambda_min: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            armijo_c: 1e-4,
            shrink: 0.5,
            max_backtracks: 10,
            lambda_min: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tau_abs: f64,
    pub tau_rel: f64,
    pub max_iters: usize,
    pub forcing: ForcingConfig,
    pub linesearch: LineSearchConfig,
    pub gmres: GmresConfig,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tau_abs: 1e-8,
            tau_rel: 1e-8,
            max_iters: 20,
            forcing: ForcingConfig::default(),
            linesearch: LineSearchConfig::default(),
            gmres: GmresConfig::default(),
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let f = &self.forcing;
        let ls = &self.linesearch;
        let checks = [
            (
                self.tau_abs > 0.0 && self.tau_rel > 0.0,
                "tolerances must be positive",
            ),
            (self.max_iters >= 1, "max_iters must be at least 1"),
            (
                0.0 < f.eta_min && f.eta_min <= f.eta_max && f.eta_max < 1.0,
                "forcing needs 0 < eta_min <= eta_max < 1",
            ),
            (0.0 < f.eta0 && f.eta0 < 1.0, "eta0 must lie in (0, 1)"),
            (
                0.0 < ls.shrink && ls.shrink < 1.0,
                "shrink must lie in (0, 1)",
            ),
            (
                0.0 < ls.armijo_c && ls.armijo_c < 1.0,
                "armijo_c must lie in (0, 1)",
            ),
            (
                0.0 < ls.lambda_min && ls.lambda_min <= 1.0,
                "lambda_min must lie in (0, 1]",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidConfig(msg.to_string()));
            }
        }
        self.gmres.validate()
    }
}

/// Which part of a solve produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Newton,
    Global,
    Local,
    Series,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Newton => "newton",
            Phase::Global => "global",
            Phase::Local => "local",
            Phase::Series => "series",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub phase: Phase,
    pub set_size: usize,
    /// `|f|` on the active set after the step.
    pub residual_norm: f64,
    /// `|f|` on all unknowns after the step, when it was evaluated.
    pub global_residual_norm: Option<f64>,
    pub eta: f64,
    pub linear_iters: usize,
    pub lambda: f64,
    pub line_search_failed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonStatus {
    Converged,
    MaxIters,
    LinearFailure,
}

impl NewtonStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, NewtonStatus::Converged)
    }
}

/// Combined absolute/relative test `norm <= tau_abs + tau_rel * norm0`.
pub fn converged(norm: f64, norm0: f64, cfg: &NewtonConfig) -> bool {
    norm <= cfg.tau_abs + cfg.tau_rel * norm0
}

/// Forcing term for the next linear solve.
///
/// `eta = gamma * (norm_k / norm_km1)^exponent`, kept at least
/// `gamma * eta_prev^exponent` when that exceeds 0.1, then clamped to
/// `[eta_min, eta_max]`. The first step uses `eta0`.
pub fn forcing_eta(
    norm_k: f64,
    norm_km1: f64,
    eta_prev: f64,
    cfg: &NewtonConfig,
    first: bool,
) -> f64 {
    let f = &cfg.forcing;
    if first {
        return f.eta0;
    }
    let mut eta = f.gamma * (norm_k / norm_km1).powf(f.exponent);
    let floor = f.gamma * eta_prev.powf(f.exponent);
    if floor > 0.1 {
        eta = eta.max(floor);
    }
    eta.clamp(f.eta_min, f.eta_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub lambda: f64,
    /// Reduced residual at the accepted point.
    pub residual: Vec<f64>,
    pub norm: f64,
    /// No trial met the sufficient-decrease test and `lambda_min` was taken.
    pub failed: bool,
}

/// Backtracks over `lambda = 1, s, s^2, ...` until
/// `|f(x + lambda dx)| <= (1 - c lambda) f0norm`. Gives up after
/// `max_backtracks` reductions and takes `lambda_min`. `x` is not modified.
pub fn line_search<P: NonlinearProblem + ?Sized>(
    problem: &P,
    set: &LayeredIndexSet,
    x: &[f64],
    dx: &[f64],
    f0norm: f64,
    cfg: &NewtonConfig,
) -> Result<LineSearchOutcome> {
    check_len(problem.dim(), x.len())?;
    check_len(set.len(), dx.len())?;
    let ls = &cfg.linesearch;
    let mut trial = x.to_vec();
    let mut f = vec![0.0; set.len()];
    let eval = |lambda: f64, trial: &mut Vec<f64>, f: &mut Vec<f64>| -> f64 {
        for (&a, d) in set.set_vec().iter().zip(dx) {
            trial[a] = x[a] + lambda * d;
        }
        problem.eval_reduced(trial, set, f);
        norm2(f)
    };

    let mut lambda = 1.0;
    for _ in 0..=ls.max_backtracks {
        let norm = eval(lambda, &mut trial, &mut f);
        if norm.is_finite() && norm <= (1.0 - ls.armijo_c * lambda) * f0norm {
            return Ok(LineSearchOutcome {
                lambda,
                residual: f,
                norm,
                failed: false,
            });
        }
        lambda *= ls.shrink;
    }
    let norm = eval(ls.lambda_min, &mut trial, &mut f);
    Ok(LineSearchOutcome {
        lambda: ls.lambda_min,
        residual: f,
        norm,
        failed: true,
    })
}

/// Forcing history carried between calls. The single-series variant of the
/// set algorithm threads one of these through consecutive one-step solves so
/// the forcing schedule matches an uninterrupted Newton run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForcingMemory {
    prev_norm: Option<f64>,
    eta_prev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub status: NewtonStatus,
    pub history: Vec<IterationRecord>,
    /// Reduced norm at entry; the reference for the relative tolerance.
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Reduced residual at the final iterate.
    pub residual: Vec<f64>,
    /// Undamped Newton direction of the last step, empty if no step was
    /// taken.
    pub last_step: Vec<f64>,
}

/// Runs at most `min(budget, cfg.max_iters)` Newton steps on `set`,
/// updating `x` in place on member indices only.
pub fn newton_solve<P: NonlinearProblem + ?Sized>(
    problem: &P,
    set: &LayeredIndexSet,
    x: &mut [f64],
    cfg: &NewtonConfig,
    budget: usize,
) -> Result<NewtonOutcome> {
    newton_solve_with(problem, set, x, cfg, budget, &mut ForcingMemory::default())
}

pub fn newton_solve_with<P: NonlinearProblem + ?Sized>(
    problem: &P,
    set: &LayeredIndexSet,
    x: &mut [f64],
    cfg: &NewtonConfig,
    budget: usize,
    memory: &mut ForcingMemory,
) -> Result<NewtonOutcome> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if budget == 0 {
        return Err(Error::InvalidConfig(
            "newton budget must be at least 1".into(),
        ));
    }
    let mut f = problem.residual_reduced(x, set)?;
    let initial_norm = norm2(&f);
    let mut norm = initial_norm;
    let mut history = Vec::new();
    let mut last_step = Vec::new();
    let mut status = NewtonStatus::MaxIters;
    let iters = budget.min(cfg.max_iters);

    for k in 1..=iters {
        if converged(norm, initial_norm, cfg) {
            status = NewtonStatus::Converged;
            break;
        }
        let eta = match memory.prev_norm {
            None => forcing_eta(norm, 0.0, 0.0, cfg, true),
            Some(prev) => forcing_eta(norm, prev, memory.eta_prev, cfg, false),
        };
        memory.prev_norm = Some(norm);
        memory.eta_prev = eta;

        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let gmres_cfg = GmresConfig {
            rtol: eta,
            ..cfg.gmres
        };
        let solved = {
            let mut op = JfnkOperator::with_base_residual(problem, set, x, f.clone())?;
            gmres_solve(&mut op, &rhs, &gmres_cfg)
        };
        let (dx, stats) = match solved {
            Ok(v) => v,
            Err(Error::ResidualOverflow) => {
                status = NewtonStatus::LinearFailure;
                break;
            }
            Err(e) => return Err(e),
        };
        if !stats.converged
            && stats.final_relative_residual.partial_cmp(&1.0) != Some(std::cmp::Ordering::Less)
        {
            log::warn!(
                "linear solve made no progress after {} iterations",
                stats.iterations
            );
            history.push(IterationRecord {
                k,
                phase: Phase::Newton,
                set_size: set.len(),
                residual_norm: norm,
                global_residual_norm: None,
                eta,
                linear_iters: stats.iterations,
                lambda: 0.0,
                line_search_failed: false,
            });
            status = NewtonStatus::LinearFailure;
            break;
        }

        let ls = line_search(problem, set, x, &dx, norm, cfg)?;
        if !ls.norm.is_finite() {
            status = NewtonStatus::LinearFailure;
            break;
        }
        set.scatter_update(x, &dx, ls.lambda)?;
        f = ls.residual;
        norm = ls.norm;
        history.push(IterationRecord {
            k,
            phase: Phase::Newton,
            set_size: set.len(),
            residual_norm: norm,
            global_residual_norm: if set.is_full() { Some(norm) } else { None },
            eta,
            linear_iters: stats.iterations,
            lambda: ls.lambda,
            line_search_failed: ls.failed,
        });
        last_step = dx;
    }
    if status == NewtonStatus::MaxIters && converged(norm, initial_norm, cfg) {
        status = NewtonStatus::Converged;
    }

    Ok(NewtonOutcome {
        status,
        history,
        initial_norm,
        final_norm: norm,
        residual: f,
        last_step,
    })
}
