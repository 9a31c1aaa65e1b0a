//! Uniform and graded time grids: nodes, step sizes, the step-ratio bound
//! and the smallest N meeting a target step.
//!
//! Usage: `cargo run --release --example time_grids`

use fhn_osc::timegrid::{build, choose_n_for_target, GridMode};

fn main() -> fhn_osc::Result<()> {
    for mode in [GridMode::Uniform, GridMode::Graded] {
        let g = build(mode, 1.0, 8)?;
        println!("{mode}, T = 1, N = 8 (ratio bound {:.4})", g.ratio_bound());
        for n in 0..g.steps() {
            println!(
                "  t_{n} = {:.6}  tau_{n} = {:.6}  midpoint {:.6}",
                g.nodes[n],
                g.tau(n),
                g.midpoint(n)
            );
        }
        for k in 4..=8 {
            let target = 2f64.powi(-k);
            let n = choose_n_for_target(mode, 1.0, target)?;
            println!(
                "  max tau <= 2^-{k}: N = {n}, max tau {:.6e}",
                build(mode, 1.0, n)?.max_tau()
            );
        }
    }
    Ok(())
}
