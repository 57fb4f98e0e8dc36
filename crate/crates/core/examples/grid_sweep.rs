//! Newton against the set algorithm over growing grids, reporting iteration
//! counts and size-weighted linear work.

use setnewton::driver::{plain_newton, set_algorithm, SetSolveConfig};
use setnewton::problems::SpikeBvp1D;
use setnewton::setrules::{RuleConfig, RuleKind};

fn main() -> setnewton::Result<()> {
    let cfg = SetSolveConfig {
        rule: RuleConfig::new(RuleKind::ResidualMean, 0.001),
        ..SetSolveConfig::default()
    };
    println!("    N  newton it(lin)   set cyc/it(lin)   work ratio  sets");
    for n in [500, 1000, 2000, 5000] {
        let p = SpikeBvp1D::new(n)?;
        let x0 = vec![0.0; n];
        let a = plain_newton(&p, &x0, &cfg.newton)?;
        let b = set_algorithm(&p, &x0, &cfg)?;
        println!(
            "{n:5}  {:3}({:4})        {:2}/{:3}({:4})       {:.3}       {:?}",
            a.total_nonlinear_iters,
            a.total_linear_iters,
            b.outer_cycles,
            b.total_nonlinear_iters,
            b.total_linear_iters,
            b.reduced_work() as f64 / a.reduced_work() as f64,
            b.set_size_trace
        );
    }
    Ok(())
}
