//! Finite-difference reference against the closed-form solutions of
//! Examples 1 and 2 on two lattices.
//!
//! Usage: `cargo run --release --example oracle_validation`

use fhn_osc::model::example_problem;
use fhn_osc::oracle::oracle_solve;

fn main() -> fhn_osc::Result<()> {
    for id in [1, 2] {
        let problem = example_problem(id)?;
        for &(nx, nt) in &[(64usize, 256usize), (128, 512)] {
            let start = std::time::Instant::now();
            let sol = oracle_solve(&problem, nx, nt)?;
            let v = sol.validation.expect("closed-form solution");
            println!(
                "example {id}: nx = {nx}, nt = {nt}: relative max error {:.3e} (abs {:.3e} / {:.3e}), picard ≤ {}, {:.1}s",
                v.relative(),
                v.max_abs_error[0],
                v.max_abs_error[1],
                sol.max_picard_iterations,
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
