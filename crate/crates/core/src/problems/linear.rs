use crate::{check_len, GridMap, LayeredIndexSet, NonlinearProblem, Result};

/// Affine system `f(x) = A x - b` with a dense row-major `A`.
///
/// Newton solves it in a single step; handy as a reference problem for the
/// Krylov and Newton layers.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        check_len(n * n, a.len())?;
        GridMap::line(n)?;
        Ok(Self { n, a, b })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self::new(a, vec![0.0; n])
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn row(&self, x: &[f64], i: usize) -> f64 {
        let r = &self.a[i * self.n..(i + 1) * self.n];
        r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - self.b[i]
    }
}

impl NonlinearProblem for LinearSystem {
    fn grid(&self) -> GridMap {
        GridMap::line(self.n).expect("n >= 1")
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(x, i);
        }
    }

    fn eval_reduced(&self, x: &[f64], set: &LayeredIndexSet, out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(set.set_vec()) {
            *o = self.row(x, i);
        }
    }
}
