//! The set algorithm on the spike problem: global step, rule, local solve,
//! repeated until the full residual converges.

use setnewton::driver::{plain_newton, set_algorithm, SetSolveConfig};
use setnewton::problems::SpikeBvp1D;
use setnewton::setrules::{RuleConfig, RuleKind};

fn main() -> setnewton::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let alpha: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.01);

    let p = SpikeBvp1D::new(n)?;
    let x0 = vec![0.0; n];
    let cfg = SetSolveConfig {
        rule: RuleConfig::new(RuleKind::ResidualMean, alpha),
        ..SetSolveConfig::default()
    };
    let r = set_algorithm(&p, &x0, &cfg)?;
    for s in &r.sets {
        let idx = s.set.set_vec_one_based();
        println!(
            "cycle {}: {} unknowns, {}..{}",
            s.iter,
            s.set.len(),
            idx[0],
            idx[idx.len() - 1]
        );
    }
    for h in &r.history {
        println!(
            "{:3} {:6} size {:5} |f| {:.4e} lin {:3}",
            h.k,
            h.phase.as_str(),
            h.set_size,
            h.residual_norm,
            h.linear_iters
        );
    }

    let newton = plain_newton(&p, &x0, &cfg.newton)?;
    println!(
        "set: {:?}, {} cycles, {} linear, work {}",
        r.status,
        r.outer_cycles,
        r.total_linear_iters,
        r.reduced_work()
    );
    println!(
        "newton: {:?}, {} iterations, {} linear, work {}",
        newton.status,
        newton.total_nonlinear_iters,
        newton.total_linear_iters,
        newton.reduced_work()
    );
    Ok(())
}
