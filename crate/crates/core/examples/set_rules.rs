//! Compare the selection rules on the first residual of the spike problem.

use setnewton::problems::SpikeBvp1D;
use setnewton::setrules::{select_flags, RuleConfig, RuleKind};
use setnewton::{LayeredIndexSet, NonlinearProblem};

fn main() -> setnewton::Result<()> {
    let n = 100;
    let p = SpikeBvp1D::new(n)?;
    let x = vec![0.0; n];
    let f = p.residual_full(&x)?;
    // at x = 0 every unknown has |dx| >= |x|, so the step rule alone keeps all
    let dx = vec![1.0; n];

    for kind in [
        RuleKind::ResidualRms,
        RuleKind::ResidualMean,
        RuleKind::StepSize,
    ] {
        for alpha in [0.1, 0.01, 0.001] {
            let flags = select_flags(&f, &dx, &x, &RuleConfig::new(kind, alpha))?;
            let set = LayeredIndexSet::build_from_flags(&flags, p.grid())?;
            let idx = set.set_vec_one_based();
            println!(
                "{kind:?} alpha={alpha}: {} unknowns, {}..{}",
                set.len(),
                idx.first().unwrap_or(&0),
                idx.last().unwrap_or(&0)
            );
        }
    }
    Ok(())
}
