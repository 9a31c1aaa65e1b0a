//! Spline spaces and their orthonormal bases under the discrete inner product.
//!
//! The scalar space is the tensor product of two univariate C¹ spline spaces,
//! and the collocation rule is a tensor product too, so the discrete Gram
//! matrix of the raw basis factors as `G_y ⊗ G_x`. Gram–Schmidt on the raw
//! functions in lexicographic order is then the tensor product of the
//! per-axis Gram–Schmidt factors (the Cholesky factor of a Kronecker product
//! is the Kronecker product of the factors), which is how the basis is built
//! here. Basis function `k = i + nx·j` of a component is `q_i(x)·r_j(y)`.
//!
//! The vector-valued basis is `{(φ, 0)} ∪ {(0, φ)}`: block 0 carries the `u`
//! component and block 1 the `v` component.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, MAX_GRAM_CONDITION};
use crate::mesh::{AxisPoints, CollocationGrid, Domain, Mesh};
use crate::spline::{AxisSpline, Limit};

/// Boundary treatment of one solution component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Trace {
    /// No constraint; boundary conditions enter weakly.
    #[default]
    Free,
    /// Homogeneous Dirichlet: raw functions that interpolate the boundary are
    /// removed before orthonormalization.
    Zero,
}

/// Tensor-product C¹ spline space of degree `m` on a rectangular mesh.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    pub degree: usize,
    pub domain: Domain,
    pub x: AxisSpline,
    pub y: AxisSpline,
    pub traces: [Trace; 2],
}

pub const MIN_DEGREE: usize = 3;

pub fn build_spline_space(mesh: &Mesh, m: usize) -> Result<SplineSpace> {
    if m < MIN_DEGREE {
        return Err(invalid(format!("spline degree must be ≥ {MIN_DEGREE}, got {m}")));
    }
    Ok(SplineSpace {
        degree: m,
        domain: mesh.domain,
        x: AxisSpline::new(&mesh.x_lines, m)?,
        y: AxisSpline::new(&mesh.y_lines, m)?,
        traces: [Trace::Free; 2],
    })
}

impl SplineSpace {
    pub fn with_traces(mut self, traces: [Trace; 2]) -> Self {
        self.traces = traces;
        self
    }

    /// Dimension of the unconstrained scalar space.
    pub fn dim_scalar(&self) -> usize {
        self.x.dim() * self.y.dim()
    }
}

/// Orthonormal basis along one axis, expressed over the kept raw functions.
#[derive(Debug, Clone)]
pub struct AxisBasis {
    pub spline: AxisSpline,
    /// Raw functions `kept.0 .. kept.1` span this axis space.
    pub kept: (usize, usize),
    /// `(kept × dim)` coefficients; column `k` is orthonormal function `k`.
    pub coef: DMatrix<f64>,
    /// Values, first and second derivatives at the axis collocation nodes,
    /// each `(nodes × dim)`.
    pub values: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// Values at mesh lines and one-sided first derivatives there,
    /// each `(lines × dim)`.
    pub line_values: DMatrix<f64>,
    pub line_d1_left: DMatrix<f64>,
    pub line_d1_right: DMatrix<f64>,
    /// Condition estimate of the raw axis Gram matrix.
    pub condition: f64,
}

impl AxisBasis {
    fn build(spline: &AxisSpline, axis: &AxisPoints, trace: Trace) -> Result<Self> {
        let raw_dim = spline.dim();
        let kept = match trace {
            Trace::Free => (0, raw_dim),
            Trace::Zero => (1, raw_dim - 1),
        };
        if kept.1 <= kept.0 {
            return Err(invalid("constrained axis space is empty"));
        }
        let raw = raw_tables(spline, axis);
        let cols = kept.1 - kept.0;
        let restrict = |t: &DMatrix<f64>| t.columns(kept.0, cols).into_owned();
        let r0 = restrict(&raw[0]);

        let mut weighted = r0.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= axis.weights[i];
        }
        let gram = r0.transpose() * &weighted;
        let condition = linalg::condition_estimate(&gram);
        let coef = linalg::gram_schmidt(&gram)?;

        let values = &r0 * &coef;
        let d1 = restrict(&raw[1]) * &coef;
        let d2 = restrict(&raw[2]) * &coef;

        let lines = spline.lines();
        let line_values = restrict(&spline.table(lines, Limit::FromRight, 0)) * &coef;
        let line_d1_left = restrict(&spline.table(lines, Limit::FromLeft, 1)) * &coef;
        let line_d1_right = restrict(&spline.table(lines, Limit::FromRight, 1)) * &coef;

        Ok(Self {
            spline: spline.clone(),
            kept,
            coef,
            values,
            d1,
            d2,
            line_values,
            line_d1_left,
            line_d1_right,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.coef.ncols()
    }

    /// Rows of orthonormal-basis values and derivatives at `x`, using the
    /// polynomial piece of `cell`. Returns `[value, d1, d2]`, each `1 × dim`.
    pub fn rows_on_cell(&self, x: f64, cell: usize) -> [DMatrix<f64>; 3] {
        let e = self.spline.eval_on_cell(x, cell);
        let mut out = [
            DMatrix::zeros(1, self.dim()),
            DMatrix::zeros(1, self.dim()),
            DMatrix::zeros(1, self.dim()),
        ];
        for (order, row) in out.iter_mut().enumerate() {
            for (j, &v) in e.ders[order].iter().enumerate() {
                let raw = e.first + j;
                if raw < self.kept.0 || raw >= self.kept.1 {
                    continue;
                }
                let r = raw - self.kept.0;
                for k in 0..self.dim() {
                    row[(0, k)] += v * self.coef[(r, k)];
                }
            }
        }
        out
    }
}

/// Raw B-spline tables `[values, d1, d2]` at the axis collocation nodes.
fn raw_tables(spline: &AxisSpline, axis: &AxisPoints) -> [DMatrix<f64>; 3] {
    let n = axis.len();
    let mut out = [
        DMatrix::zeros(n, spline.dim()),
        DMatrix::zeros(n, spline.dim()),
        DMatrix::zeros(n, spline.dim()),
    ];
    for (p, (&x, &cell)) in axis.nodes.iter().zip(&axis.cell).enumerate() {
        let e = spline.eval_on_cell(x, cell);
        for (order, table) in out.iter_mut().enumerate() {
            for (j, &v) in e.ders[order].iter().enumerate() {
                table[(p, e.first + j)] = v;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ComponentBasis {
    pub trace: Trace,
    pub x: AxisBasis,
    pub y: AxisBasis,
}

impl ComponentBasis {
    pub fn shape(&self) -> (usize, usize) {
        (self.x.dim(), self.y.dim())
    }

    pub fn dim(&self) -> usize {
        self.x.dim() * self.y.dim()
    }

    pub fn condition(&self) -> f64 {
        self.x.condition * self.y.condition
    }
}

/// Orthonormal vector-valued basis of `W_h = U_h × U_h`.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub space: SplineSpace,
    pub components: [ComponentBasis; 2],
    /// Per-axis quadrature weights, copied from the grid used to build the
    /// basis.
    pub x_weights: Vec<f64>,
    pub y_weights: Vec<f64>,
}

/// Modified Gram–Schmidt (with reorthogonalization) of the raw spline basis
/// under the grid's discrete inner product.
pub fn orthonormalize(space: &SplineSpace, grid: &CollocationGrid) -> Result<BasisSet> {
    if space.x.lines() != grid.x_axis.lines.as_slice() || space.y.lines() != grid.y_axis.lines.as_slice() {
        return Err(invalid("spline space and collocation grid use different meshes"));
    }
    let build = |trace: Trace| -> Result<ComponentBasis> {
        let comp = ComponentBasis {
            trace,
            x: AxisBasis::build(&space.x, &grid.x_axis, trace)?,
            y: AxisBasis::build(&space.y, &grid.y_axis, trace)?,
        };
        let condition = comp.condition();
        if !(condition <= MAX_GRAM_CONDITION) {
            return Err(Error::IllConditionedBasis { condition });
        }
        Ok(comp)
    };
    let first = build(space.traces[0])?;
    let second = if space.traces[1] == space.traces[0] {
        first.clone()
    } else {
        build(space.traces[1])?
    };
    Ok(BasisSet {
        space: space.clone(),
        components: [first, second],
        x_weights: grid.x_axis.weights.clone(),
        y_weights: grid.y_axis.weights.clone(),
    })
}

/// Coefficients of a discrete field; block `c` is an `(nx × ny)` matrix for
/// component `c`. The flat layout is column-major, `u` block first.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub blocks: [DMatrix<f64>; 2],
}

impl Coefficients {
    pub fn zeros(basis: &BasisSet) -> Self {
        let [a, b] = &basis.components;
        Self {
            blocks: [
                DMatrix::zeros(a.x.dim(), a.y.dim()),
                DMatrix::zeros(b.x.dim(), b.y.dim()),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.blocks[0].len() + self.blocks[1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_vector(basis: &BasisSet, data: &[f64]) -> Result<Self> {
        let mut out = Self::zeros(basis);
        if data.len() != out.len() {
            return Err(invalid(format!(
                "coefficient vector has length {}, basis has {}",
                data.len(),
                out.len()
            )));
        }
        let n0 = out.blocks[0].len();
        out.blocks[0].as_mut_slice().copy_from_slice(&data[..n0]);
        out.blocks[1].as_mut_slice().copy_from_slice(&data[n0..]);
        Ok(out)
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(self.blocks[0].as_slice());
        v.extend_from_slice(self.blocks[1].as_slice());
        v
    }

    /// Euclidean norm, equal to the discrete norm of the field.
    pub fn norm(&self) -> f64 {
        (self.blocks[0].norm_squared() + self.blocks[1].norm_squared()).sqrt()
    }

    pub fn component_norm(&self, c: usize) -> f64 {
        self.blocks[c].norm()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &Coefficients) {
        for (s, o) in self.blocks.iter_mut().zip(&other.blocks) {
            *s += o * a;
        }
    }

    pub fn scaled(&self, a: f64) -> Coefficients {
        Coefficients {
            blocks: [&self.blocks[0] * a, &self.blocks[1] * a],
        }
    }

    /// `Σ aᵢ · xᵢ`
    pub fn combination(terms: &[(f64, &Coefficients)]) -> Coefficients {
        let mut out = terms[0].1.scaled(terms[0].0);
        for (a, x) in &terms[1..] {
            out.axpy(*a, x);
        }
        out
    }
}

impl Add for &Coefficients {
    type Output = Coefficients;
    fn add(self, rhs: &Coefficients) -> Coefficients {
        Coefficients {
            blocks: [&self.blocks[0] + &rhs.blocks[0], &self.blocks[1] + &rhs.blocks[1]],
        }
    }
}

impl Sub for &Coefficients {
    type Output = Coefficients;
    fn sub(self, rhs: &Coefficients) -> Coefficients {
        Coefficients {
            blocks: [&self.blocks[0] - &rhs.blocks[0], &self.blocks[1] - &rhs.blocks[1]],
        }
    }
}

impl Mul<f64> for &Coefficients {
    type Output = Coefficients;
    fn mul(self, rhs: f64) -> Coefficients {
        self.scaled(rhs)
    }
}

/// Field values at the collocation points in tensor layout: block `c` is an
/// `(npx × npy)` matrix of component `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub blocks: [DMatrix<f64>; 2],
}

impl GridField {
    pub fn zeros(grid: &CollocationGrid) -> Self {
        let (nx, ny) = grid.shape();
        Self {
            blocks: [DMatrix::zeros(nx, ny), DMatrix::zeros(nx, ny)],
        }
    }

    /// Samples `f(x, y)` at every collocation point.
    pub fn sample(grid: &CollocationGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for (q, &y) in grid.y_axis.nodes.iter().enumerate() {
            for (p, &x) in grid.x_axis.nodes.iter().enumerate() {
                let [a, b] = f(x, y);
                out.blocks[0][(p, q)] = a;
                out.blocks[1][(p, q)] = b;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Values and gradients of every basis function at a list of points.
#[derive(Debug, Clone)]
pub struct BasisTables {
    /// Component (0 = u, 1 = v) carried by each basis function.
    pub component: Vec<usize>,
    /// `(M × P)` values.
    pub values: DMatrix<f64>,
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
}

/// One-sided evaluation of a field on an element: values, gradients and
/// Laplacians of both components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub value: [f64; 2],
    /// `grad[c] = [∂x, ∂y]` of component `c`.
    pub grad: [[f64; 2]; 2],
    pub laplacian: [f64; 2],
}

impl BasisSet {
    pub fn dim(&self) -> usize {
        self.components.iter().map(ComponentBasis::dim).sum()
    }

    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn domain(&self) -> Domain {
        self.space.domain
    }

    /// Condition estimate of the full raw Gram matrix (worst component).
    pub fn condition(&self) -> f64 {
        self.components
            .iter()
            .map(ComponentBasis::condition)
            .fold(0.0, f64::max)
    }

    /// Field values at the collocation points: `E_x C E_yᵀ` per component.
    pub fn evaluate_grid(&self, c: &Coefficients) -> GridField {
        GridField {
            blocks: [0, 1].map(|k| {
                let b = &self.components[k];
                &b.x.values * &c.blocks[k] * b.y.values.transpose()
            }),
        }
    }

    /// `(∂x, ∂y)` of each component at the collocation points.
    pub fn gradient_grid(&self, c: &Coefficients) -> [GridField; 2] {
        let dx = [0, 1].map(|k| {
            let b = &self.components[k];
            &b.x.d1 * &c.blocks[k] * b.y.values.transpose()
        });
        let dy = [0, 1].map(|k| {
            let b = &self.components[k];
            &b.x.values * &c.blocks[k] * b.y.d1.transpose()
        });
        [GridField { blocks: dx }, GridField { blocks: dy }]
    }

    pub fn laplacian_grid(&self, c: &Coefficients) -> GridField {
        GridField {
            blocks: [0, 1].map(|k| {
                let b = &self.components[k];
                &b.x.d2 * &c.blocks[k] * b.y.values.transpose() + &b.x.values * &c.blocks[k] * b.y.d2.transpose()
            }),
        }
    }

    /// Discrete L² projection of grid samples: `c_k = (f, ρ_k)_·`.
    pub fn project_grid(&self, f: &GridField) -> Coefficients {
        Coefficients {
            blocks: [0, 1].map(|k| {
                let b = &self.components[k];
                let mut weighted = f.blocks[k].clone();
                for (q, mut col) in weighted.column_iter_mut().enumerate() {
                    let wy = self.y_weights[q];
                    for (p, v) in col.iter_mut().enumerate() {
                        *v *= self.x_weights[p] * wy;
                    }
                }
                b.x.values.transpose() * weighted * &b.y.values
            }),
        }
    }

    /// Evaluation using the polynomial piece of element `(ix, iy)`.
    pub fn evaluate_on_element(&self, c: &Coefficients, x: f64, y: f64, ix: usize, iy: usize) -> PointEval {
        let mut out = PointEval {
            value: [0.0; 2],
            grad: [[0.0; 2]; 2],
            laplacian: [0.0; 2],
        };
        for k in 0..2 {
            let b = &self.components[k];
            let [vx, dx, ddx] = b.x.rows_on_cell(x, ix);
            let [vy, dy, ddy] = b.y.rows_on_cell(y, iy);
            let cm = &c.blocks[k];
            let bil = |a: &DMatrix<f64>, bb: &DMatrix<f64>| (a * cm * bb.transpose())[(0, 0)];
            out.value[k] = bil(&vx, &vy);
            out.grad[k] = [bil(&dx, &vy), bil(&vx, &dy)];
            out.laplacian[k] = bil(&ddx, &vy) + bil(&vx, &ddy);
        }
        out
    }

    /// Evaluation at an arbitrary point of the closed domain.
    pub fn evaluate(&self, c: &Coefficients, x: f64, y: f64) -> Result<PointEval> {
        if !self.domain().contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let ix = self.space.x.cell_of(x, Limit::FromRight);
        let iy = self.space.y.cell_of(y, Limit::FromRight);
        Ok(self.evaluate_on_element(c, x, y, ix, iy))
    }

    /// Evaluation with explicit one-sided limits on mesh lines.
    pub fn evaluate_one_sided(&self, c: &Coefficients, x: f64, y: f64, lx: Limit, ly: Limit) -> Result<PointEval> {
        if !self.domain().contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let ix = self.space.x.cell_of(x, lx);
        let iy = self.space.y.cell_of(y, ly);
        Ok(self.evaluate_on_element(c, x, y, ix, iy))
    }

    /// Values and gradients of all `M_m` basis functions at `points`.
    pub fn eval_basis(&self, points: &[[f64; 2]]) -> Result<BasisTables> {
        let m = self.dim();
        let mut values = DMatrix::zeros(m, points.len());
        let mut grad_x = DMatrix::zeros(m, points.len());
        let mut grad_y = DMatrix::zeros(m, points.len());
        let mut component = Vec::with_capacity(m);
        for (k, b) in self.components.iter().enumerate() {
            component.extend(std::iter::repeat(k).take(b.dim()));
        }
        for (p, &[x, y]) in points.iter().enumerate() {
            if !self.domain().contains(x, y) {
                return Err(Error::OutOfDomain { x, y });
            }
            let ix = self.space.x.cell_of(x, Limit::FromRight);
            let iy = self.space.y.cell_of(y, Limit::FromRight);
            let mut offset = 0;
            for b in &self.components {
                let [vx, dx, _] = b.x.rows_on_cell(x, ix);
                let [vy, dy, _] = b.y.rows_on_cell(y, iy);
                let nx = b.x.dim();
                for j in 0..b.y.dim() {
                    for i in 0..nx {
                        let k = offset + i + nx * j;
                        values[(k, p)] = vx[(0, i)] * vy[(0, j)];
                        grad_x[(k, p)] = dx[(0, i)] * vy[(0, j)];
                        grad_y[(k, p)] = vx[(0, i)] * dy[(0, j)];
                    }
                }
                offset += b.dim();
            }
        }
        Ok(BasisTables {
            component,
            values,
            grad_x,
            grad_y,
        })
    }

    /// Coefficients of basis function `k` alone.
    pub fn unit(&self, k: usize) -> Coefficients {
        let mut v = vec![0.0; self.dim()];
        v[k] = 1.0;
        Coefficients::from_vector(self, &v).expect("length matches")
    }
}
