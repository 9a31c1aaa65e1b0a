//! A manufactured solution that is linear in time and lies in the spline
//! space is reproduced to rounding error once the step respects the
//! stability limit.
//!
//! Usage: `cargo run --release --example manufactured_exactness`

use std::sync::Arc;

use fhn_osc::analysis::ErrorTracker;
use fhn_osc::mesh::Domain;
use fhn_osc::model::{reaction_F, BoundaryCondition, FhnParams, ProblemSpec};
use fhn_osc::operators::assemble_operators;
use fhn_osc::stepper::{critical_step, run_with, Discretization, RunConfig};
use fhn_osc::timegrid::{build, choose_n_for_target, GridMode};

// x²(3 − 2x): zero slope at 0 and 1
fn p(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

fn p2(x: f64) -> f64 {
    6.0 - 12.0 * x
}

fn main() -> fhn_osc::Result<()> {
    let params = FhnParams {
        gamma: [1.0, 0.5],
        ..FhnParams::default()
    };
    let exact = |x: f64, y: f64, t: f64| [(1.0 + 2.0 * t) * p(x) * p(y), (0.5 - t) * p(x) * p(y)];
    let problem = ProblemSpec {
        name: "linear in time".into(),
        domain: Domain::square(0.0, 1.0)?,
        t_final: 0.1,
        params,
        bc: [BoundaryCondition::Robin, BoundaryCondition::Robin],
        initial: Arc::new(move |x, y| exact(x, y, 0.0)),
        source: Some(Arc::new(move |x, y, t, _| {
            let w = exact(x, y, t);
            let lap = p2(x) * p(y) + p(x) * p2(y);
            let f = reaction_F(w[0], w[1], &params);
            [
                2.0 * p(x) * p(y) - params.gamma[0] * (1.0 + 2.0 * t) * lap - f[0],
                -p(x) * p(y) - params.gamma[1] * (0.5 - t) * lap - f[1],
            ]
        })),
        exact: Some(Arc::new(exact)),
    };
    let disc = Discretization::new(&problem, 0.25, 4, 6)?;
    let tc = critical_step(&assemble_operators(&disc.basis, &problem.params));
    for mode in [GridMode::Uniform, GridMode::Graded] {
        let n = choose_n_for_target(mode, problem.t_final, 0.5 * tc)?;
        let times = build(mode, problem.t_final, n)?;
        let mut tracker = ErrorTracker::new(&disc.basis, &disc.grid, &exact);
        run_with(&problem, &disc, &times, &RunConfig::default(), |l, c| {
            tracker.observe(l, c);
            Ok(())
        })?;
        println!(
            "{mode} grid, {n} steps: err_u {:.3e}, err_v {:.3e}",
            tracker.max[0], tracker.max[1]
        );
    }
    Ok(())
}
