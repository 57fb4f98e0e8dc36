//! One Newton direction via matrix-free GMRES on a subset of the unknowns.

use setnewton::krylov::{gmres_solve, GmresConfig, JfnkOperator};
use setnewton::problems::SpikeBvp1D;
use setnewton::{norm2, LayeredIndexSet, NonlinearProblem};

fn main() -> setnewton::Result<()> {
    let n = 100;
    let p = SpikeBvp1D::new(n)?;
    let x: Vec<f64> = (0..n)
        .map(|i| 0.9 * setnewton::problems::spike_exact(p.node_x(i)))
        .collect();

    let flags: Vec<bool> = (0..n).map(|i| (40..60).contains(&i)).collect();
    let set = LayeredIndexSet::build_from_flags(&flags, p.grid())?;
    let f = p.residual_reduced(&x, &set)?;
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();

    let mut op = JfnkOperator::new(&p, &set, &x)?;
    for rtol in [1e-2, 1e-6, 1e-10] {
        let cfg = GmresConfig {
            rtol,
            ..GmresConfig::default()
        };
        let (dx, stats) = gmres_solve(&mut op, &rhs, &cfg)?;
        println!(
            "rtol {rtol:e}: {} iterations, relative residual {:.2e}, |dx| {:.3e}",
            stats.iterations,
            stats.final_relative_residual,
            norm2(&dx)
        );
    }
    println!("residual evaluations: {}", op.evaluations());
    Ok(())
}
