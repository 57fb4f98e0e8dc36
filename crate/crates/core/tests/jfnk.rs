use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setnewton::krylov::{gmres_solve, GmresConfig, JfnkOperator, LinearOperator};
use setnewton::problems::{spike_exact, SpikeBvp1D};
use setnewton::{LayeredIndexSet, NonlinearProblem};

/// Jacobian by central differences, one column per unknown.
fn fd_jacobian(p: &dyn NonlinearProblem, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = 1e-6 * (1.0 + x[c].abs());
        xp[c] = x[c] + h;
        let fp = p.residual_full(&xp).unwrap();
        xp[c] = x[c] - h;
        let fm = p.residual_full(&xp).unwrap();
        xp[c] = x[c];
        for r in 0..n {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

fn random_set(rng: &mut impl Rng, n: usize, p: &SpikeBvp1D) -> LayeredIndexSet {
    loop {
        let flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if flags.iter().any(|&b| b) {
            return LayeredIndexSet::build_from_flags(&flags, p.grid()).unwrap();
        }
    }
}

#[test]
fn matches_dense_submatrix_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let n = 10 + trial * 2;
        let p = SpikeBvp1D::new(n).unwrap();
        let x: Vec<f64> = (0..n)
            .map(|i| spike_exact(p.node_x(i)) + rng.gen_range(-50.0..50.0))
            .collect();
        let jac = fd_jacobian(&p, &x);
        let set = random_set(&mut rng, n, &p);
        let idx = set.set_vec();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| jac[(idx[r], idx[c])]);
        let v = DVector::from_fn(idx.len(), |_, _| rng.gen_range(-1.0..1.0));

        let mut op = JfnkOperator::new(&p, &set, &x).unwrap();
        let mut out = vec![0.0; idx.len()];
        op.apply(v.as_slice(), &mut out).unwrap();
        let want = &sub * &v;
        let err = (DVector::from_vec(out) - &want).norm() / want.norm();
        assert!(err <= 1e-5, "trial {trial}: relative error {err:e}");
    }
}

#[test]
fn newton_direction_matches_dense_solve() {
    let p = SpikeBvp1D::new(40).unwrap();
    let x = vec![0.0; 40];
    let set = LayeredIndexSet::full_set(p.grid());
    let f = p.residual_full(&x).unwrap();
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();

    let mut op = JfnkOperator::new(&p, &set, &x).unwrap();
    let cfg = GmresConfig {
        restart: 40,
        max_total_iters: 40,
        rtol: 1e-10,
    };
    let (dx, stats) = gmres_solve(&mut op, &rhs, &cfg).unwrap();
    assert!(stats.converged);

    let jac = fd_jacobian(&p, &x);
    let want = jac.lu().solve(&DVector::from_vec(rhs)).unwrap();
    let err = (DVector::from_vec(dx) - &want).norm() / want.norm();
    assert!(err <= 1e-5, "relative error {err:e}");
}
