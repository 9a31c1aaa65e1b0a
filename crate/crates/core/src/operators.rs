//! Stiffness, Robin boundary and face-jump operators in Kronecker form, and
//! the shifted solve `(I + αK) c = r` with `K = A + B − J`.
//!
//! For a component with per-axis operators `L_x`, `L_y` the 2D operator is
//! `I ⊗ L_x + L_y ⊗ I`, applied to a coefficient block as `L_x C + C L_yᵀ`.
//! The mass matrix is the identity because the basis is orthonormal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basis::{AxisBasis, BasisSet, Coefficients};
use crate::error::{Error, Phase, Result};
use crate::linalg::kron;
use crate::model::FhnParams;

/// One-dimensional pieces of an operator along one axis.
#[derive(Debug, Clone)]
pub struct AxisOperator {
    /// `Σ w φ_i' φ_k'`
    pub stiffness: DMatrix<f64>,
    /// `φ_i(a)φ_k(a) + φ_i(b)φ_k(b)`
    pub boundary: DMatrix<f64>,
    /// `Σ_{interior lines} φ_i(x_l) (φ_k'(x_l⁻) − φ_k'(x_l⁺))`
    pub jump: DMatrix<f64>,
}

impl AxisOperator {
    pub fn build(axis: &AxisBasis, weights: &[f64]) -> Self {
        let mut wd = axis.d1.clone();
        for (i, mut row) in wd.row_iter_mut().enumerate() {
            row *= weights[i];
        }
        let stiffness = axis.d1.transpose() * wd;

        let nl = axis.line_values.nrows();
        let ends = [0, nl - 1];
        let n = axis.dim();
        let mut boundary = DMatrix::zeros(n, n);
        for &l in &ends {
            let r = axis.line_values.row(l);
            boundary += r.transpose() * r;
        }
        let mut jump = DMatrix::zeros(n, n);
        for l in 1..nl - 1 {
            let r = axis.line_values.row(l);
            let d = axis.line_d1_left.row(l) - axis.line_d1_right.row(l);
            jump += r.transpose() * d;
        }
        Self {
            stiffness,
            boundary,
            jump,
        }
    }
}

#[derive(Debug, Clone)]
struct Diagonalization {
    qx: DMatrix<f64>,
    lx: DVector<f64>,
    qy: DMatrix<f64>,
    ly: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct ComponentOperator {
    pub gamma: f64,
    pub beta: f64,
    pub x: AxisOperator,
    pub y: AxisOperator,
    /// `γ(K + β b − j)` per axis.
    lx: DMatrix<f64>,
    ly: DMatrix<f64>,
    diag: Diagonalization,
}

/// Which terms of `K = A + B − J` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Stiffness,
    Boundary,
    Jump,
    Full,
}

impl ComponentOperator {
    fn new(gamma: f64, beta: f64, x: AxisOperator, y: AxisOperator) -> Self {
        let combine = |a: &AxisOperator| gamma * (&a.stiffness + &a.boundary * beta - &a.jump);
        let lx = combine(&x);
        let ly = combine(&y);
        let eig = |m: &DMatrix<f64>| {
            let sym = (m + m.transpose()) * 0.5;
            let e = SymmetricEigen::new(sym);
            (e.eigenvectors, e.eigenvalues)
        };
        let (qx, lxv) = eig(&lx);
        let (qy, lyv) = eig(&ly);
        Self {
            gamma,
            beta,
            x,
            y,
            lx,
            ly,
            diag: Diagonalization {
                qx,
                lx: lxv,
                qy,
                ly: lyv,
            },
        }
    }

    fn axis_pair(&self, term: Term) -> (DMatrix<f64>, DMatrix<f64>) {
        let g = self.gamma;
        match term {
            Term::Stiffness => (&self.x.stiffness * g, &self.y.stiffness * g),
            Term::Boundary => (&self.x.boundary * (g * self.beta), &self.y.boundary * (g * self.beta)),
            Term::Jump => (&self.x.jump * g, &self.y.jump * g),
            Term::Full => (self.lx.clone(), self.ly.clone()),
        }
    }

    fn apply_full(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        &self.lx * c + c * self.ly.transpose()
    }

    /// Dense matrix of one term, in the column-major coefficient ordering.
    pub fn dense(&self, term: Term) -> DMatrix<f64> {
        let (ax, ay) = self.axis_pair(term);
        let ix = DMatrix::identity(ax.nrows(), ax.nrows());
        let iy = DMatrix::identity(ay.nrows(), ay.nrows());
        kron(&iy, &ax) + kron(&ay, &ix)
    }

    /// Largest eigenvalue of the symmetric part.
    pub fn lambda_max(&self) -> f64 {
        self.diag.lx.max() + self.diag.ly.max()
    }

    fn precondition(&self, alpha: f64, r: &DMatrix<f64>) -> DMatrix<f64> {
        let d = &self.diag;
        let mut t = d.qx.transpose() * r * &d.qy;
        for j in 0..t.ncols() {
            for i in 0..t.nrows() {
                t[(i, j)] /= 1.0 + alpha * (d.lx[i] + d.ly[j]);
            }
        }
        &d.qx * t * d.qy.transpose()
    }
}

/// Outcome of a shifted solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub components: [ComponentOperator; 2],
}

pub const SOLVE_TOLERANCE: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 30;

pub fn assemble_operators(basis: &BasisSet, params: &FhnParams) -> AssembledOperators {
    let build = |k: usize| {
        let b = &basis.components[k];
        ComponentOperator::new(
            params.gamma[k],
            params.beta[k],
            AxisOperator::build(&b.x, &basis.x_weights),
            AxisOperator::build(&b.y, &basis.y_weights),
        )
    };
    AssembledOperators {
        components: [build(0), build(1)],
    }
}

impl AssembledOperators {
    /// `K c`
    pub fn apply(&self, c: &Coefficients) -> Coefficients {
        Coefficients {
            blocks: [0, 1].map(|k| self.components[k].apply_full(&c.blocks[k])),
        }
    }

    pub fn apply_term(&self, term: Term, c: &Coefficients) -> Coefficients {
        Coefficients {
            blocks: [0, 1].map(|k| {
                let (ax, ay) = self.components[k].axis_pair(term);
                &ax * &c.blocks[k] + &c.blocks[k] * ay.transpose()
            }),
        }
    }

    /// Dense block-diagonal matrix of one term over the full basis.
    pub fn dense(&self, term: Term) -> DMatrix<f64> {
        let a = self.components[0].dense(term);
        let b = self.components[1].dense(term);
        let (na, nb) = (a.nrows(), b.nrows());
        let mut out = DMatrix::zeros(na + nb, na + nb);
        out.view_mut((0, 0), (na, na)).copy_from(&a);
        out.view_mut((na, na), (nb, nb)).copy_from(&b);
        out
    }

    pub fn lambda_max(&self) -> f64 {
        self.components
            .iter()
            .map(ComponentOperator::lambda_max)
            .fold(0.0, f64::max)
    }

    /// Solves `(I + αK) c = r` by fast diagonalization of the symmetric
    /// part followed by iterative refinement against the full operator.
    pub fn solve_shifted(
        &self,
        alpha: f64,
        rhs: &Coefficients,
        step: usize,
        phase: Phase,
    ) -> Result<(Coefficients, SolveInfo)> {
        let fail = |reason: String| Error::SolverFailure { step, phase, reason };
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(fail(format!("shift {alpha} is not a non-negative number")));
        }
        let scale = rhs.norm();
        if !scale.is_finite() {
            return Err(Error::BlowUp { step, phase });
        }
        if scale == 0.0 {
            return Ok((
                rhs.clone(),
                SolveInfo {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut x = Coefficients {
            blocks: [0, 1].map(|k| self.components[k].precondition(alpha, &rhs.blocks[k])),
        };
        let mut iterations = 1;
        loop {
            let kx = self.apply(&x);
            let mut r = rhs - &x;
            r.axpy(-alpha, &kx);
            let rel = r.norm() / scale;
            if !rel.is_finite() {
                return Err(fail("non-finite residual".into()));
            }
            if rel <= SOLVE_TOLERANCE {
                return Ok((
                    x,
                    SolveInfo {
                        iterations,
                        relative_residual: rel,
                    },
                ));
            }
            if iterations >= MAX_REFINEMENTS {
                return Err(fail(format!("residual {rel:e} after {iterations} refinement steps")));
            }
            let dx = Coefficients {
                blocks: [0, 1].map(|k| self.components[k].precondition(alpha, &r.blocks[k])),
            };
            x.axpy(1.0, &dx);
            iterations += 1;
        }
    }
}
