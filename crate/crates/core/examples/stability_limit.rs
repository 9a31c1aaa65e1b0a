//! Where the explicit predictor stops being stable: for each mesh, the
//! largest eigenvalue of the stiffness operator, the critical step `1/λ_max`,
//! and Example 1 errors just below and above it (and at the tabulated
//! `τ = 2⁻⁶`).
//!
//! Usage: `cargo run --release --example stability_limit`

use fhn_osc::analysis::ErrorTracker;
use fhn_osc::model::example_problem;
use fhn_osc::operators::assemble_operators;
use fhn_osc::stepper::{critical_step, run_with, scalar_amplification, Discretization, RunConfig};
use fhn_osc::timegrid::{build_uniform, choose_n_for_target, GridMode};

fn main() -> fhn_osc::Result<()> {
    for z in [0.5, 1.0, 1.5, 10.0, 1e4] {
        println!("amplification at tau*lambda = {z:>7}: {:.4}", scalar_amplification(z));
    }
    let problem = example_problem(1)?;
    let exact = problem.exact.clone().expect("closed-form solution");
    for h in [0.25, 0.125] {
        let disc = Discretization::new(&problem, h, 4, 6)?;
        let ops = assemble_operators(&disc.basis, &problem.params);
        let tc = critical_step(&ops);
        println!(
            "h = {h}: lambda_max = {:.4e}, critical step = {tc:.4e}",
            ops.lambda_max()
        );
        for tau in [1.0 / 64.0, 1.2 * tc, 0.9 * tc] {
            let n = choose_n_for_target(GridMode::Uniform, problem.t_final, tau)?;
            let times = build_uniform(problem.t_final, n)?;
            let mut tracker = ErrorTracker::new(&disc.basis, &disc.grid, &*exact);
            let res = run_with(&problem, &disc, &times, &RunConfig::default(), |l, c| {
                tracker.observe(l, c);
                Ok(())
            });
            let status = match res {
                Ok(out) => format!("{:.1}s", out.wall_seconds),
                Err(e) => e.to_string(),
            };
            println!(
                "  tau = {:.4e} (N = {n:>6}): err_u {:.4e}  err_v {:.4e}  [{status}]",
                times.max_tau(),
                tracker.max[0],
                tracker.max[1]
            );
        }
    }
    Ok(())
}
