//! Discrete inner products, boundary and face forms, and projections.
//!
//! Point-list representations here mirror the collocation grid one-to-one
//! and are meant for checks and diagnostics. The time stepper works with the
//! tensor-structured operators in [`crate::operators`] instead.

use crate::basis::{BasisSet, Coefficients, GridField};
use crate::error::{invalid, Error, Result};
use crate::mesh::CollocationGrid;
use crate::spline::Limit;

/// Values of a two-component field at the collocation points, in grid order,
/// with optional gradients (`grad[c] = [∂x, ∂y]`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValues {
    pub values: Vec<[f64; 2]>,
    pub gradients: Option<Vec<[[f64; 2]; 2]>>,
}

impl FieldValues {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_fn(grid: &CollocationGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        Self {
            values: grid.points.iter().map(|p| f(p.x, p.y)).collect(),
            gradients: None,
        }
    }

    pub fn from_fn_with_grad(grid: &CollocationGrid, f: impl Fn(f64, f64) -> ([f64; 2], [[f64; 2]; 2])) -> Self {
        let (values, gradients) = grid.points.iter().map(|p| f(p.x, p.y)).unzip();
        Self {
            values,
            gradients: Some(gradients),
        }
    }

    pub fn from_grid(field: &GridField) -> Self {
        let n = field.blocks[0].len();
        let (a, b) = (field.blocks[0].as_slice(), field.blocks[1].as_slice());
        Self {
            values: (0..n).map(|i| [a[i], b[i]]).collect(),
            gradients: None,
        }
    }

    /// Values and gradients of a discrete field.
    pub fn from_coefficients(basis: &BasisSet, c: &Coefficients) -> Self {
        let mut out = Self::from_grid(&basis.evaluate_grid(c));
        let [gx, gy] = basis.gradient_grid(c);
        let n = out.len();
        let slices = |g: &GridField| [g.blocks[0].as_slice().to_vec(), g.blocks[1].as_slice().to_vec()];
        let (sx, sy) = (slices(&gx), slices(&gy));
        out.gradients = Some((0..n).map(|i| [[sx[0][i], sy[0][i]], [sx[1][i], sy[1][i]]]).collect());
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| [a * v[0], a * v[1]]).collect(),
            gradients: self.gradients.as_ref().map(|g| {
                g.iter()
                    .map(|d| [[a * d[0][0], a * d[0][1]], [a * d[1][0], a * d[1][1]]])
                    .collect()
            }),
        }
    }
}

fn check_len(n: usize, grid: &CollocationGrid) -> Result<()> {
    if n != grid.len() {
        return Err(invalid(format!(
            "field has {n} points, collocation grid has {}",
            grid.len()
        )));
    }
    Ok(())
}

/// `(U, V)_·`
pub fn ip_scalar(u: &FieldValues, v: &FieldValues, grid: &CollocationGrid) -> Result<f64> {
    check_len(u.len(), grid)?;
    check_len(v.len(), grid)?;
    Ok(grid
        .points
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(p, (a, b))| p.weight * (a[0] * b[0] + a[1] * b[1]))
        .sum())
}

/// `(∇̄U, ∇̄V)_{*,·}`
pub fn ip_grad(u: &FieldValues, v: &FieldValues, grid: &CollocationGrid) -> Result<f64> {
    check_len(u.len(), grid)?;
    check_len(v.len(), grid)?;
    let (Some(gu), Some(gv)) = (&u.gradients, &v.gradients) else {
        return Err(invalid("gradient form needs fields with gradients"));
    };
    Ok(grid
        .points
        .iter()
        .zip(gu.iter().zip(gv))
        .map(|(p, (a, b))| {
            let dot: f64 = (0..2).map(|c| a[c][0] * b[c][0] + a[c][1] * b[c][1]).sum();
            p.weight * dot
        })
        .sum())
}

pub fn norm_dot(u: &FieldValues, grid: &CollocationGrid) -> f64 {
    ip_scalar(u, u, grid).map(|s| s.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

pub fn norm_grad(u: &FieldValues, grid: &CollocationGrid) -> f64 {
    ip_grad(u, u, grid).map(|s| s.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// Values and one-sided gradients of a field at the boundary quadrature
/// points (`grid.boundary_points` order).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<[f64; 2]>,
    pub gradients: Vec<[[f64; 2]; 2]>,
}

impl BoundaryTrace {
    pub fn from_fn(grid: &CollocationGrid, f: impl Fn(f64, f64) -> ([f64; 2], [[f64; 2]; 2])) -> Self {
        let (values, gradients) = grid.boundary_points.iter().map(|p| f(p.x, p.y)).unzip();
        Self { values, gradients }
    }

    pub fn from_coefficients(basis: &BasisSet, grid: &CollocationGrid, c: &Coefficients) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.boundary_points.len());
        let mut gradients = Vec::with_capacity(grid.boundary_points.len());
        for p in &grid.boundary_points {
            // inward one-sided limits pick the owning element
            let lx = if p.normal[0] > 0.0 {
                Limit::FromLeft
            } else {
                Limit::FromRight
            };
            let ly = if p.normal[1] > 0.0 {
                Limit::FromLeft
            } else {
                Limit::FromRight
            };
            let e = basis.evaluate_one_sided(c, p.x, p.y, lx, ly)?;
            values.push(e.value);
            gradients.push(e.grad);
        }
        Ok(Self { values, gradients })
    }
}

/// `Σ w · Vᵗ diag(γ β) U` over the boundary quadrature points: the Robin
/// term that replaces `−⟨U, V⟩` when `∂U/∂n = −β U`.
pub fn robin_form(
    u: &BoundaryTrace,
    v: &BoundaryTrace,
    gamma: [f64; 2],
    beta: [f64; 2],
    grid: &CollocationGrid,
) -> f64 {
    grid.boundary_points
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(p, (a, b))| p.weight * (0..2).map(|c| gamma[c] * beta[c] * a[c] * b[c]).sum::<f64>())
        .sum()
}

/// Weighted boundary product `Σ w · UᵗV`.
pub fn boundary_form(u: &BoundaryTrace, v: &BoundaryTrace, grid: &CollocationGrid) -> f64 {
    robin_form(u, v, [1.0; 2], [1.0; 2], grid)
}

/// `⟨U, V⟩ = Σ w · Vᵗ (∇̄ᵗU) n` over the boundary.
pub fn boundary_flux_form(u: &BoundaryTrace, v: &BoundaryTrace, grid: &CollocationGrid) -> f64 {
    grid.boundary_points
        .iter()
        .zip(u.gradients.iter().zip(&v.values))
        .map(|(p, (g, b))| {
            let n = p.normal;
            p.weight * (0..2).map(|c| b[c] * (g[c][0] * n[0] + g[c][1] * n[1])).sum::<f64>()
        })
        .sum()
}

/// Data on interior faces, one entry per face quadrature point in
/// `grid.interior_faces` order. The face normal points from the minus to
/// the plus element.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTrace {
    pub values: Vec<[f64; 2]>,
    pub grad_minus: Vec<[[f64; 2]; 2]>,
    pub grad_plus: Vec<[[f64; 2]; 2]>,
}

type SideEval = ([f64; 2], [[f64; 2]; 2]);

impl FaceTrace {
    /// `f(x, y, plus_side)` gives value and gradient from one side.
    pub fn from_fn(grid: &CollocationGrid, f: impl Fn(f64, f64, bool) -> SideEval) -> Self {
        let mut out = Self {
            values: Vec::new(),
            grad_minus: Vec::new(),
            grad_plus: Vec::new(),
        };
        for face in &grid.interior_faces {
            for p in &face.points {
                let (v, gm) = f(p.x, p.y, false);
                let (_, gp) = f(p.x, p.y, true);
                out.values.push(v);
                out.grad_minus.push(gm);
                out.grad_plus.push(gp);
            }
        }
        out
    }

    pub fn from_coefficients(basis: &BasisSet, grid: &CollocationGrid, c: &Coefficients) -> Result<Self> {
        let mut out = Self {
            values: Vec::new(),
            grad_minus: Vec::new(),
            grad_plus: Vec::new(),
        };
        for face in &grid.interior_faces {
            let vertical = face.normal[0] != 0.0;
            for p in &face.points {
                let (lm, lp) = (Limit::FromLeft, Limit::FromRight);
                let (minus, plus) = if vertical {
                    (
                        basis.evaluate_one_sided(c, p.x, p.y, lm, lp)?,
                        basis.evaluate_one_sided(c, p.x, p.y, lp, lp)?,
                    )
                } else {
                    (
                        basis.evaluate_one_sided(c, p.x, p.y, lp, lm)?,
                        basis.evaluate_one_sided(c, p.x, p.y, lp, lp)?,
                    )
                };
                out.values.push(minus.value);
                out.grad_minus.push(minus.grad);
                out.grad_plus.push(plus.grad);
            }
        }
        Ok(out)
    }
}

/// `⟨U, V⟩_· = Σ w · Vᵗ [[∇̄ᵗU]]` over interior faces, where
/// `[[∇u]] = (∇u⁻ − ∇u⁺)·n`.
pub fn jump_form(u: &FaceTrace, v: &FaceTrace, grid: &CollocationGrid) -> Result<f64> {
    let count: usize = grid.interior_faces.iter().map(|f| f.points.len()).sum();
    if u.grad_minus.len() != count || v.values.len() != count {
        return Err(invalid("face data does not match the grid's interior faces"));
    }
    let mut sum = 0.0;
    let mut i = 0;
    for face in &grid.interior_faces {
        let n = face.normal;
        for p in &face.points {
            let (gm, gp, b) = (&u.grad_minus[i], &u.grad_plus[i], &v.values[i]);
            let jump: f64 = (0..2)
                .map(|c| b[c] * ((gm[c][0] - gp[c][0]) * n[0] + (gm[c][1] - gp[c][1]) * n[1]))
                .sum();
            sum += p.weight * jump;
            i += 1;
        }
    }
    Ok(sum)
}

/// Discrete L² projection of `f` onto the basis.
pub fn l2_project(f: impl Fn(f64, f64) -> [f64; 2], basis: &BasisSet, grid: &CollocationGrid) -> Result<Coefficients> {
    let samples = GridField::sample(grid, f);
    if !samples.is_finite() {
        return Err(Error::InvalidData("projected function has non-finite values".into()));
    }
    Ok(basis.project_grid(&samples))
}

/// Terms of the discrete integration-by-parts identity for `U, V` in the
/// spline space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpTerms {
    pub laplacian: f64,
    pub boundary: f64,
    pub jump: f64,
    pub gradient: f64,
}

impl IbpTerms {
    pub fn residual(&self) -> f64 {
        (self.laplacian - (self.boundary + self.jump - self.gradient)).abs()
    }

    pub fn scale(&self) -> f64 {
        self.laplacian
            .abs()
            .max(self.boundary.abs())
            .max(self.jump.abs())
            .max(self.gradient.abs())
    }
}

/// `(Δ̄U, V)_·` against `⟨U, V⟩ + ⟨U, V⟩_· − (∇̄U, ∇̄V)_{*,·}`.
pub fn integration_by_parts_terms(
    u: &Coefficients,
    v: &Coefficients,
    basis: &BasisSet,
    grid: &CollocationGrid,
) -> Result<IbpTerms> {
    let lap = FieldValues::from_grid(&basis.laplacian_grid(u));
    let vf = FieldValues::from_coefficients(basis, v);
    let uf = FieldValues::from_coefficients(basis, u);
    let ub = BoundaryTrace::from_coefficients(basis, grid, u)?;
    let vb = BoundaryTrace::from_coefficients(basis, grid, v)?;
    let uj = FaceTrace::from_coefficients(basis, grid, u)?;
    let vj = FaceTrace::from_coefficients(basis, grid, v)?;
    Ok(IbpTerms {
        laplacian: ip_scalar(&lap, &vf, grid)?,
        boundary: boundary_flux_form(&ub, &vb, grid),
        jump: jump_form(&uj, &vj, grid)?,
        gradient: ip_grad(&uf, &vf, grid)?,
    })
}

pub fn integration_by_parts_residual(
    u: &Coefficients,
    v: &Coefficients,
    basis: &BasisSet,
    grid: &CollocationGrid,
) -> Result<f64> {
    Ok(integration_by_parts_terms(u, v, basis, grid)?.residual())
}
