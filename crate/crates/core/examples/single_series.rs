//! The single-series variant: one Newton step per set, re-selecting the set
//! before every step.

use setnewton::driver::{set_algorithm_variant, SetSolveConfig};
use setnewton::problems::SpikeBvp1D;

fn main() -> setnewton::Result<()> {
    let n = 100;
    let p = SpikeBvp1D::new(n)?;
    let r = set_algorithm_variant(&p, &vec![0.0; n], &SetSolveConfig::default())?;
    for (h, s) in r.history.iter().zip(&r.sets) {
        println!(
            "{:3} size {:4} |f_S| {:.4e} |f| {:.4e} eta {:.2e}",
            h.k,
            s.set.len(),
            h.residual_norm,
            h.global_residual_norm.unwrap_or(f64::NAN),
            h.eta
        );
    }
    println!(
        "{:?} after {} steps, work {}",
        r.status,
        r.total_nonlinear_iters,
        r.reduced_work()
    );
    Ok(())
}
