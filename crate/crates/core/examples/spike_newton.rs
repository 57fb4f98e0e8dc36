//! Plain inexact Newton on the spike problem, printing the convergence
//! history and the error against the exact solution.

use setnewton::driver::plain_newton;
use setnewton::newton::NewtonConfig;
use setnewton::problems::SpikeBvp1D;

fn main() -> setnewton::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let p = SpikeBvp1D::new(n)?;
    let r = plain_newton(&p, &vec![0.0; n], &NewtonConfig::default())?;

    println!("  k  |f|            eta       lin  lambda");
    for h in &r.history {
        println!(
            "{:3}  {:.6e}  {:.2e}  {:3}  {}",
            h.k, h.residual_norm, h.eta, h.linear_iters, h.lambda
        );
    }
    println!(
        "{:?}: {} iterations, {} linear, max nodal error {:.4}",
        r.status,
        r.total_nonlinear_iters,
        r.total_linear_iters,
        r.max_error_vs(&p).unwrap()
    );
    Ok(())
}
