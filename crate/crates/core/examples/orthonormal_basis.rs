//! Orthonormalized C¹ spline bases: dimension, conditioning of the raw
//! spline Gram matrix, and the largest Gram defect after orthonormalization.
//!
//! Usage: `cargo run --release --example orthonormal_basis`

use fhn_osc::analysis::grid_norms;
use fhn_osc::basis::{build_spline_space, orthonormalize, Trace};
use fhn_osc::mesh::{build_collocation, gauss_rule, Domain, Mesh};

fn main() -> fhn_osc::Result<()> {
    let mesh = Mesh::uniform(Domain::new(0.0, 2.0, 0.0, 1.0)?, 6, 3)?;
    for m in 3..=6 {
        let grid = build_collocation(&mesh, &gauss_rule(m + 2)?);
        for traces in [[Trace::Free, Trace::Free], [Trace::Zero, Trace::Free]] {
            let basis = orthonormalize(&build_spline_space(&mesh, m)?.with_traces(traces), &grid)?;
            // every unit coefficient vector must have unit discrete norm
            let mut worst = 0.0f64;
            for k in 0..basis.dim() {
                let n = grid_norms(&grid, &basis.evaluate_grid(&basis.unit(k)));
                worst = worst.max((n[0] * n[0] + n[1] * n[1] - 1.0).abs());
            }
            println!(
                "m = {m}, traces {traces:?}: dim {:>4}, condition {:.3e}, norm defect {worst:.2e}",
                basis.dim(),
                basis.condition()
            );
        }
    }
    Ok(())
}
