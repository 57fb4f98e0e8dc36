//! Solve orchestration: plain Newton, the set algorithm and its
//! single-series variant.
//!
//! The set algorithm repeats
//!
//! 1. a Newton step on the global set, which supplies a realistic residual
//!    and update,
//! 2. the set rule on that residual and update, rewriting the flag layer,
//! 3. rebuilding the local set and its `set_vec`,
//! 4. a Newton solve on the local set with everything else frozen,
//! 5. a convergence test of the full residual,
//!
//! until the full residual passes the combined tolerance against the initial
//! global norm. The single-series variant skips the accurate local solve:
//! it re-selects the set before every Newton step and takes one step on it.

use std::time::{Duration, Instant};

use crate::newton::{
    converged, newton_solve, newton_solve_with, ForcingMemory, IterationRecord, NewtonConfig,
    NewtonOutcome, NewtonStatus, Phase,
};
use crate::setrules::{select_flags, RuleConfig};
use crate::{check_len, norm2, Error, LayeredIndexSet, NonlinearProblem, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Solve each local set to its own tolerance.
    InnerSolve,
    /// One Newton step per set, re-selecting every iteration.
    SingleSeries,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetSolveConfig {
    pub rule: RuleConfig,
    pub variant: Variant,
    /// Newton steps on the global set per outer cycle.
    pub global_budget: usize,
    /// Newton step cap for each local solve.
    pub inner_max_iters: usize,
    pub newton: NewtonConfig,
    pub max_outer_cycles: usize,
    /// Forcing term for the global step of every cycle after the first.
    ///
    /// The first global step starts from an uninformed guess and uses the
    /// usual initial forcing. Later global steps start from a locally
    /// converged iterate; solving them loosely gives a residual and update
    /// that are mostly linear-solver noise, and the set rule then picks the
    /// noise instead of the remaining error.
    pub global_eta: f64,
}

impl Default for SetSolveConfig {
    fn default() -> Self {
        Self {
            rule: RuleConfig::default(),
            variant: Variant::InnerSolve,
            global_budget: 1,
            inner_max_iters: 20,
            newton: NewtonConfig::default(),
            max_outer_cycles: 20,
            global_eta: 3e-3,
        }
    }
}

impl SetSolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        self.newton.validate()?;
        if self.global_budget == 0 || self.inner_max_iters == 0 || self.max_outer_cycles == 0 {
            return Err(Error::InvalidConfig(
                "global_budget, inner_max_iters and max_outer_cycles must be at least 1".into(),
            ));
        }
        if !(self.global_eta > 0.0 && self.global_eta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "global_eta must lie in (0, 1), got {}",
                self.global_eta
            )));
        }
        Ok(())
    }
}

/// A local set as it was formed, tagged with the outer cycle (or series
/// iteration) that formed it.
#[derive(Debug, Clone, PartialEq)]
pub struct FormedSet {
    pub iter: usize,
    pub set: LayeredIndexSet,
}

#[derive(Debug, Clone)]
pub struct SetSolveResult {
    pub x_final: Vec<f64>,
    pub status: NewtonStatus,
    /// Executions of the global step (plain Newton counts its single run
    /// as one cycle).
    pub outer_cycles: usize,
    pub total_nonlinear_iters: usize,
    pub total_linear_iters: usize,
    pub set_size_trace: Vec<usize>,
    pub sets: Vec<FormedSet>,
    /// Every Newton step in order, `k` numbered from 1 across phases.
    pub history: Vec<IterationRecord>,
    /// `|f(x0)|` over all unknowns.
    pub initial_norm: f64,
    pub final_global_norm: f64,
    pub wall_time: Duration,
}

impl SetSolveResult {
    /// Linear iterations weighted by the size of the system they ran on.
    pub fn reduced_work(&self) -> usize {
        self.history
            .iter()
            .map(|r| r.set_size * r.linear_iters)
            .sum()
    }

    /// Max-norm distance to the problem's exact solution, if it has one.
    pub fn max_error_vs<P: NonlinearProblem + ?Sized>(&self, problem: &P) -> Option<f64> {
        problem.exact_solution().map(|exact| {
            exact
                .iter()
                .zip(&self.x_final)
                .fold(0.0, |m, (e, x)| f64::max(m, (e - x).abs()))
        })
    }
}

struct Recorder {
    history: Vec<IterationRecord>,
    sets: Vec<FormedSet>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            history: Vec::new(),
            sets: Vec::new(),
        }
    }

    fn absorb(&mut self, outcome: &NewtonOutcome, phase: Phase) {
        for rec in &outcome.history {
            let mut rec = rec.clone();
            rec.k = self.history.len() + 1;
            rec.phase = phase;
            self.history.push(rec);
        }
    }

    fn push_set(&mut self, iter: usize, set: LayeredIndexSet) {
        let grid = set.grid();
        if grid.nj() == 1 && grid.dof_per_node() == 1 && !set.is_contiguous() {
            log::warn!(
                "set {iter} on a line grid has holes: {} unknowns spread over {}..{}",
                set.len(),
                set.set_vec().first().map_or(0, |i| i + 1),
                set.set_vec().last().map_or(0, |i| i + 1)
            );
        }
        self.sets.push(FormedSet { iter, set });
    }

    fn mark_global_norm(&mut self, norm: f64) {
        if let Some(last) = self.history.last_mut() {
            last.global_residual_norm = Some(norm);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        x_final: Vec<f64>,
        status: NewtonStatus,
        outer_cycles: usize,
        initial_norm: f64,
        final_global_norm: f64,
        started: Instant,
    ) -> SetSolveResult {
        SetSolveResult {
            x_final,
            status,
            outer_cycles,
            total_nonlinear_iters: self.history.len(),
            total_linear_iters: self.history.iter().map(|r| r.linear_iters).sum(),
            set_size_trace: self.sets.iter().map(|s| s.set.len()).collect(),
            sets: self.sets,
            history: self.history,
            initial_norm,
            final_global_norm,
            wall_time: started.elapsed(),
        }
    }
}

/// Newton on the global set with the full iteration budget.
pub fn plain_newton<P: NonlinearProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<SetSolveResult> {
    check_len(problem.dim(), x0.len())?;
    let started = Instant::now();
    let global = LayeredIndexSet::full_set(problem.grid());
    let mut x = x0.to_vec();
    let mut rec = Recorder::new();
    rec.sets.push(FormedSet {
        iter: 1,
        set: global.clone(),
    });
    let outcome = newton_solve(problem, &global, &mut x, cfg, cfg.max_iters)?;
    rec.absorb(&outcome, Phase::Newton);
    Ok(rec.finish(
        x,
        outcome.status,
        1,
        outcome.initial_norm,
        outcome.final_norm,
        started,
    ))
}

/// The set algorithm with accurate local solves.
pub fn set_algorithm<P: NonlinearProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    cfg: &SetSolveConfig,
) -> Result<SetSolveResult> {
    check_len(problem.dim(), x0.len())?;
    cfg.validate()?;
    let started = Instant::now();
    let global = LayeredIndexSet::full_set(problem.grid());
    let mut x = x0.to_vec();
    let mut rec = Recorder::new();
    let initial_norm = norm2(&problem.residual_full(&x)?);
    let mut global_norm = initial_norm;
    let mut status = NewtonStatus::MaxIters;
    let mut cycles = 0;

    if converged(global_norm, initial_norm, &cfg.newton) {
        return Ok(rec.finish(
            x,
            NewtonStatus::Converged,
            0,
            initial_norm,
            global_norm,
            started,
        ));
    }

    for cycle in 1..=cfg.max_outer_cycles {
        cycles = cycle;
        let mut gcfg = cfg.newton;
        if cycle > 1 {
            gcfg.forcing.eta0 = cfg.global_eta;
        }
        let step = newton_solve(problem, &global, &mut x, &gcfg, cfg.global_budget)?;
        rec.absorb(&step, Phase::Global);
        if step.status == NewtonStatus::LinearFailure {
            status = NewtonStatus::LinearFailure;
            global_norm = step.final_norm;
            break;
        }
        let f = step.residual;
        global_norm = step.final_norm;
        if converged(global_norm, initial_norm, &cfg.newton) {
            status = NewtonStatus::Converged;
            break;
        }

        let dx = if step.last_step.is_empty() {
            vec![0.0; x.len()]
        } else {
            step.last_step
        };
        let flags = select_flags(&f, &dx, &x, &cfg.rule)?;
        let mut local = LayeredIndexSet::build_from_flags(&flags, problem.grid())?;
        if local.is_empty() {
            log::debug!("cycle {cycle}: set rule selected nothing, using the global set");
            local = global.clone();
        }
        log::debug!("cycle {cycle}: local set of {} unknowns", local.len());

        let inner_cfg = NewtonConfig {
            max_iters: cfg.inner_max_iters,
            ..cfg.newton
        };
        let inner = newton_solve(problem, &local, &mut x, &inner_cfg, cfg.inner_max_iters)?;
        rec.push_set(cycle, local);
        rec.absorb(&inner, Phase::Local);

        global_norm = norm2(&problem.residual_full(&x)?);
        rec.mark_global_norm(global_norm);
        if inner.status == NewtonStatus::LinearFailure {
            status = NewtonStatus::LinearFailure;
            break;
        }
        if converged(global_norm, initial_norm, &cfg.newton) {
            status = NewtonStatus::Converged;
            break;
        }
    }
    Ok(rec.finish(x, status, cycles, initial_norm, global_norm, started))
}

/// Single series of Newton steps whose system size changes every step.
///
/// The first step runs on the global set; every later step runs on the set
/// selected from the current full residual and the previous step. The
/// forcing schedule carries over between steps.
pub fn set_algorithm_variant<P: NonlinearProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    cfg: &SetSolveConfig,
) -> Result<SetSolveResult> {
    check_len(problem.dim(), x0.len())?;
    cfg.validate()?;
    let started = Instant::now();
    let global = LayeredIndexSet::full_set(problem.grid());
    let mut x = x0.to_vec();
    let mut rec = Recorder::new();
    let mut f = problem.residual_full(&x)?;
    let initial_norm = norm2(&f);
    let mut global_norm = initial_norm;
    let mut status = NewtonStatus::MaxIters;
    let mut memory = ForcingMemory::default();
    let mut dx_full: Option<Vec<f64>> = None;
    let mut iters = 0;

    if converged(global_norm, initial_norm, &cfg.newton) {
        return Ok(rec.finish(
            x,
            NewtonStatus::Converged,
            0,
            initial_norm,
            global_norm,
            started,
        ));
    }

    for it in 1..=cfg.newton.max_iters {
        iters = it;
        let set = match &dx_full {
            None => global.clone(),
            Some(dx) => {
                let flags = select_flags(&f, dx, &x, &cfg.rule)?;
                let s = LayeredIndexSet::build_from_flags(&flags, problem.grid())?;
                if s.is_empty() {
                    global.clone()
                } else {
                    s
                }
            }
        };
        let step = newton_solve_with(problem, &set, &mut x, &cfg.newton, 1, &mut memory)?;
        rec.absorb(&step, Phase::Series);
        f = problem.residual_full(&x)?;
        global_norm = norm2(&f);
        rec.mark_global_norm(global_norm);
        dx_full = Some(if step.last_step.is_empty() {
            vec![0.0; x.len()]
        } else {
            set.expand(&step.last_step)?
        });
        rec.push_set(it, set);

        if step.status == NewtonStatus::LinearFailure {
            status = NewtonStatus::LinearFailure;
            break;
        }
        if converged(global_norm, initial_norm, &cfg.newton) {
            status = NewtonStatus::Converged;
            break;
        }
    }
    Ok(rec.finish(x, status, iters, initial_norm, global_norm, started))
}

/// Dispatches on `cfg.variant`.
pub fn solve_with_sets<P: NonlinearProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    cfg: &SetSolveConfig,
) -> Result<SetSolveResult> {
    match cfg.variant {
        Variant::InnerSolve => set_algorithm(problem, x0, cfg),
        Variant::SingleSeries => set_algorithm_variant(problem, x0, cfg),
    }
}
