//! L² projection of a smooth field onto splines of degree m: the error falls
//! like `h^{m+1}`.
//!
//! Usage: `cargo run --release --example projection_convergence`

use fhn_osc::analysis::{convergence_order, error_field, grid_norms};
use fhn_osc::basis::{build_spline_space, orthonormalize};
use fhn_osc::forms::l2_project;
use fhn_osc::mesh::{build_collocation, gauss_rule, Domain, Mesh};

fn main() -> fhn_osc::Result<()> {
    let f = |x: f64, y: f64| [(2.0 * x).sin() * (3.0 * y).cos(), (x + 2.0 * y).exp()];
    for m in [3, 4, 5] {
        println!("m = {m}");
        let mut prev: Option<f64> = None;
        for n in [2usize, 4, 8, 16] {
            let mesh = Mesh::uniform(Domain::square(0.0, 1.0)?, n, n)?;
            let grid = build_collocation(&mesh, &gauss_rule(m + 2)?);
            let basis = orthonormalize(&build_spline_space(&mesh, m)?, &grid)?;
            let c = l2_project(f, &basis, &grid)?;
            let e = grid_norms(&grid, &error_field(&basis, &grid, &c, &|x, y, _| f(x, y), 0.0));
            let err = (e[0] * e[0] + e[1] * e[1]).sqrt();
            match prev {
                Some(p) => println!("  n = {n:>2}: error {err:.4e}, order {:.3}", convergence_order(p, err)?),
                None => println!("  n = {n:>2}: error {err:.4e}"),
            }
            prev = Some(err);
        }
    }
    Ok(())
}
