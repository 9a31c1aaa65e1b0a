//! Example 3 (discontinuous initial data): runs the collocation scheme and the
//! finite-difference reference, then compares the two at the final time.
//!
//! Usage: `cargo run --release --example discontinuous_data [nx_oracle nt_oracle fem_cells]`

use fhn_osc::analysis::grid_norms;
use fhn_osc::basis::GridField;
use fhn_osc::model::example_problem;
use fhn_osc::oracle::oracle_solve;
use fhn_osc::stepper::{run_with, Discretization, RunConfig};
use fhn_osc::timegrid::{build_uniform, choose_n_for_target, GridMode};

fn main() -> fhn_osc::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let arg = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    let (nx, nt, cells) = (arg(0, 256), arg(1, 1024), arg(2, 32));

    let problem = example_problem(3)?;
    let h = 2.5 / cells as f64;
    let tau = 1.0 / 64.0;
    let disc = Discretization::new(&problem, h, 4, 6)?;
    let times = build_uniform(
        problem.t_final,
        choose_n_for_target(GridMode::Uniform, problem.t_final, tau)?,
    )?;

    let mut norms = Vec::new();
    let mut last = None;
    let out = run_with(&problem, &disc, &times, &RunConfig::default(), |_, c| {
        norms.push(grid_norms(&disc.grid, &disc.basis.evaluate_grid(c)));
        last = Some(c.clone());
        Ok(())
    })?;
    let total = |n: &[f64; 2]| (n[0] * n[0] + n[1] * n[1]).sqrt();
    let initial = total(&norms[0]);
    let peak = norms.iter().map(total).fold(0.0, f64::max);
    println!("scheme: {} levels in {:.2}s", norms.len(), out.wall_seconds);
    println!(
        "‖w_h⁰‖ = {initial:.6e}, max_n ‖w_h^n‖ = {peak:.6e} (ratio {:.3})",
        peak / initial
    );

    let start = std::time::Instant::now();
    let reference = oracle_solve(&problem, nx, nt)?;
    println!("oracle {nx}×{nx}, {nt} steps: {:.1}s", start.elapsed().as_secs_f64());

    let t = problem.t_final;
    let wh = disc.basis.evaluate_grid(last.as_ref().unwrap());
    let fd = GridField::sample(&disc.grid, |x, y| reference.sample(x, y, t));
    let diff = GridField {
        blocks: [0, 1].map(|k| &wh.blocks[k] - &fd.blocks[k]),
    };
    let e = grid_norms(&disc.grid, &diff);
    let r = grid_norms(&disc.grid, &fd);
    let sup = reference
        .final_snapshot()
        .fields
        .iter()
        .map(|f| f.amax())
        .fold(0.0, f64::max);
    let root_area = problem.domain.area().sqrt();
    println!("‖w_h − w_fd‖ at t = {t}: u {:.4e}, v {:.4e}", e[0], e[1]);
    println!("‖w_fd‖: u {:.4e}, v {:.4e}; max |w_fd| = {sup:.4e}", r[0], r[1]);
    println!(
        "relative: u {:.4e}, v {:.4e}",
        e[0] / (root_area * sup),
        e[1] / (root_area * sup)
    );
    let pointwise = diff.blocks.iter().map(|b| b.amax()).fold(0.0, f64::max);
    println!(
        "max pointwise difference {:.4e} (relative {:.4e})",
        pointwise,
        pointwise / sup
    );
    Ok(())
}
