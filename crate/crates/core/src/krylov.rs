//! Matrix-free linear algebra: directional-difference Jacobian products on a
//! local set and restarted GMRES.

use crate::{check_len, dot, norm2, Error, LayeredIndexSet, NonlinearProblem, Result};

/// A square linear map applied by value.
///
/// `apply` takes `&mut self` so operators may keep scratch space.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, v: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Row-major dense matrix view, mostly for tests and small reference runs.
#[derive(Debug, Clone, Copy)]
pub struct DenseOperator<'a> {
    n: usize,
    a: &'a [f64],
}

impl<'a> DenseOperator<'a> {
    pub fn new(n: usize, a: &'a [f64]) -> Result<Self> {
        check_len(n * n, a.len())?;
        Ok(Self { n, a })
    }
}

impl LinearOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&mut self, v: &[f64], out: &mut [f64]) -> Result<()> {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.a[i * self.n..(i + 1) * self.n], v);
        }
        Ok(())
    }
}

/// Square root of the double-precision machine epsilon.
pub fn default_eps_const() -> f64 {
    f64::EPSILON.sqrt()
}

/// Differencing step for a product along `v` at the set-restricted point
/// `x_set`: `eps_const * (1 + |x_set|) / |v|`.
pub fn choose_epsilon(x_set: &[f64], v: &[f64], eps_const: f64) -> Result<f64> {
    epsilon_from_norms(norm2(x_set), norm2(v), eps_const)
}

fn epsilon_from_norms(x_norm: f64, v_norm: f64, eps_const: f64) -> Result<f64> {
    if v_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(eps_const * (1.0 + x_norm) / v_norm)
}

/// The Jacobian block `J[S, S]` of a problem at a frozen iterate, applied by
/// one-sided differencing of the reduced residual:
///
/// ```text
/// J v ~ (f_S(x + eps v) - f_S(x)) / eps
/// ```
///
/// where `eps v` is scattered onto the members of `S` only. Non-member
/// columns are never excited, so this is exactly the submatrix action.
///
/// The operator owns a scratch copy of the iterate; clone it per thread.
#[derive(Debug, Clone)]
pub struct JfnkOperator<'a, P: NonlinearProblem + ?Sized> {
    problem: &'a P,
    set: &'a LayeredIndexSet,
    base_x: &'a [f64],
    base_f: Vec<f64>,
    x_set_norm: f64,
    eps_const: f64,
    scratch: Vec<f64>,
    evaluations: usize,
}

impl<'a, P: NonlinearProblem + ?Sized> JfnkOperator<'a, P> {
    pub fn new(problem: &'a P, set: &'a LayeredIndexSet, base_x: &'a [f64]) -> Result<Self> {
        let base_f = problem.residual_reduced(base_x, set)?;
        Self::with_base_residual(problem, set, base_x, base_f)
    }

    /// Reuses an already evaluated `f_S(base_x)`.
    pub fn with_base_residual(
        problem: &'a P,
        set: &'a LayeredIndexSet,
        base_x: &'a [f64],
        base_f: Vec<f64>,
    ) -> Result<Self> {
        check_len(problem.dim(), base_x.len())?;
        check_len(set.len(), base_f.len())?;
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let x_set_norm = set
            .set_vec()
            .iter()
            .map(|&a| base_x[a] * base_x[a])
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            problem,
            set,
            base_x,
            base_f,
            x_set_norm,
            eps_const: default_eps_const(),
            scratch: base_x.to_vec(),
            evaluations: 0,
        })
    }

    pub fn base_residual(&self) -> &[f64] {
        &self.base_f
    }

    /// Reduced residual evaluations spent in `apply` so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

impl<P: NonlinearProblem + ?Sized> LinearOperator for JfnkOperator<'_, P> {
    fn dim(&self) -> usize {
        self.set.len()
    }

    fn apply(&mut self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.set.len(), v.len())?;
        check_len(self.set.len(), out.len())?;
        let eps = epsilon_from_norms(self.x_set_norm, norm2(v), self.eps_const)?;
        let members = self.set.set_vec();
        for (&a, &vk) in members.iter().zip(v) {
            self.scratch[a] = self.base_x[a] + eps * vk;
        }
        self.problem.eval_reduced(&self.scratch, self.set, out);
        self.evaluations += 1;
        for &a in members {
            self.scratch[a] = self.base_x[a];
        }
        for (o, f0) in out.iter_mut().zip(&self.base_f) {
            *o = (*o - f0) / eps;
            if !o.is_finite() {
                return Err(Error::ResidualOverflow);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Krylov basis size before a restart.
    pub restart: usize,
    /// Cap on Arnoldi steps over all cycles.
    pub max_total_iters: usize,
    /// Relative residual target `|b - A x| <= rtol |b|`.
    pub rtol: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 30,
            max_total_iters: 200,
            rtol: 1e-6,
        }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 || self.max_total_iters < self.restart {
            return Err(Error::InvalidConfig(format!(
                "gmres needs restart >= 1 and max_total_iters >= restart, got {} and {}",
                self.restart, self.max_total_iters
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresStats {
    /// Arnoldi steps over all cycles.
    pub iterations: usize,
    /// Explicitly recomputed `|b - A x| / |b|`.
    pub final_relative_residual: f64,
    pub converged: bool,
    pub breakdown: bool,
}

// Arnoldi vector considered lost when its norm falls this far below the
// norm of the product it came from.
const BREAKDOWN_RATIO: f64 = 1e-13;

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Restarted GMRES from a zero initial guess, modified Gram-Schmidt Arnoldi
/// and Givens-rotation least squares.
///
/// The returned residual is recomputed from the final iterate, so it does not
/// inherit drift of the rotated estimate across restarts. Non-convergence is
/// reported in the stats, not as an error; errors come from the operator.
pub fn gmres_solve<O: LinearOperator + ?Sized>(
    op: &mut O,
    rhs: &[f64],
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, GmresStats)> {
    let n = op.dim();
    check_len(n, rhs.len())?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let b_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            GmresStats {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
                breakdown: false,
            },
        ));
    }

    let target = cfg.rtol * b_norm;
    let m = cfg.restart.max(1).min(n);
    let mut r = rhs.to_vec();
    let mut r_norm = b_norm;
    let mut total = 0;
    let mut breakdown = false;
    let mut w = vec![0.0; n];

    while r_norm > target && total < cfg.max_total_iters && !breakdown {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / r_norm).collect());
        // columns of the rotated Hessenberg matrix, i.e. R
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = r_norm;

        let mut k = 0;
        while k < m && total < cfg.max_total_iters {
            op.apply(&basis[k], &mut w)?;
            total += 1;
            let w_norm0 = norm2(&w);
            let mut h = vec![0.0; k + 2];
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(v, &w);
                h[j] = hj;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hj * vi;
                }
            }
            let h_next = norm2(&w);
            h[k + 1] = h_next;

            for (j, &(c, s)) in rotations.iter().enumerate() {
                let (a, b) = (h[j], h[j + 1]);
                h[j] = c * a + s * b;
                h[j + 1] = -s * a + c * b;
            }
            let (c, s) = givens(h[k], h[k + 1]);
            h[k] = c * h[k] + s * h[k + 1];
            h[k + 1] = 0.0;
            rotations.push((c, s));
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.truncate(k + 1);
            cols.push(h);
            k += 1;

            if h_next <= BREAKDOWN_RATIO * w_norm0 {
                breakdown = true;
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
            if g[k].abs() <= target {
                break;
            }
        }

        // back substitution on the k x k triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for (jj, col) in cols.iter().enumerate().skip(i + 1) {
                acc -= col[i] * y[jj];
            }
            let d = cols[i][i];
            y[i] = if d != 0.0 { acc / d } else { 0.0 };
        }
        for (yi, v) in y.iter().zip(&basis) {
            for (xj, vj) in x.iter_mut().zip(v) {
                *xj += yi * vj;
            }
        }

        op.apply(&x, &mut w)?;
        for ((ri, bi), ai) in r.iter_mut().zip(rhs).zip(&w) {
            *ri = bi - ai;
        }
        r_norm = norm2(&r);
    }

    Ok((
        x,
        GmresStats {
            iterations: total,
            final_relative_residual: r_norm / b_norm,
            converged: r_norm <= target,
            breakdown,
        },
    ))
}
