//! Mesh construction and the tensor Gauss collocation grid: point counts and
//! the quadrature error on `∫∫ sin x sin y = 4` over `(0, π)²`.
//!
//! Usage: `cargo run --release --example quadrature_mesh`

use std::f64::consts::PI;

use fhn_osc::mesh::{build_collocation, build_mesh, gauss_rule, Domain};

fn main() -> fhn_osc::Result<()> {
    let domain = Domain::square(0.0, PI)?;
    for h in [0.5, 0.25, 0.125] {
        let mesh = build_mesh(domain, h)?;
        println!(
            "h target {h}: {}×{} cells, diameter {:.4}, {} boundary edges",
            mesh.nx,
            mesh.ny,
            mesh.h,
            mesh.boundary_edges.len()
        );
        for l in 1..=6 {
            let grid = build_collocation(&mesh, &gauss_rule(l)?);
            let err = (grid.integrate(|x, y| x.sin() * y.sin()) - 4.0).abs();
            println!(
                "  L = {l}: {:>6} points, {:>4} on the boundary, error {err:.3e}",
                grid.points.len(),
                grid.boundary_points.len()
            );
        }
    }
    Ok(())
}
