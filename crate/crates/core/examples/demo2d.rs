//! The set algorithm on a 2D nonlinear Poisson problem, where sets are
//! genuinely row-structured. The solution is smooth, so the residual is
//! spread over the whole square and the reduction does not pay off here;
//! compare with the spike examples, where it does.

use setnewton::driver::{plain_newton, set_algorithm, SetSolveConfig};
use setnewton::problems::NonlinearPoisson2D;
use setnewton::setrules::{RuleConfig, RuleKind};
use setnewton::NonlinearProblem;

fn main() -> setnewton::Result<()> {
    let p = NonlinearPoisson2D::square(32)?;
    let x0 = vec![0.0; p.dim()];
    let newton = plain_newton(&p, &x0, &SetSolveConfig::default().newton)?;
    let cfg = SetSolveConfig {
        rule: RuleConfig::new(RuleKind::ResidualRms, 0.5),
        ..SetSolveConfig::default()
    };
    let r = set_algorithm(&p, &x0, &cfg)?;

    for s in &r.sets {
        println!(
            "cycle {}: {} unknowns on {} rows",
            s.iter,
            s.set.len(),
            s.set.rows().len()
        );
    }
    println!(
        "newton {:?}: {} iterations, work {}, error {:.2e}",
        newton.status,
        newton.total_nonlinear_iters,
        newton.reduced_work(),
        newton.max_error_vs(&p).unwrap()
    );
    println!(
        "set {:?}: {} cycles, work {}, error {:.2e}",
        r.status,
        r.outer_cycles,
        r.reduced_work(),
        r.max_error_vs(&p).unwrap()
    );
    Ok(())
}
