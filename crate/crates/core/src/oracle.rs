//! Independent reference solver: second-order finite differences on a
//! uniform node lattice, Crank–Nicolson in time with Picard iteration on the
//! nonlinear terms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{gauss_rule, Domain};
use crate::model::{reaction_F, BoundaryCondition, ProblemSpec};

pub const PICARD_TOLERANCE: f64 = 1e-12;
pub const PICARD_MAX_ITERATIONS: usize = 100;

/// Second-difference operator along one axis on its active nodes, with the
/// eigen-factorization `D = P Λ P⁻¹`.
#[derive(Debug, Clone)]
struct AxisFd {
    first: usize,
    len: usize,
    d: DMatrix<f64>,
    p: DMatrix<f64>,
    p_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl AxisFd {
    fn new(intervals: usize, dx: f64, bc: BoundaryCondition, beta: f64) -> Self {
        let (first, len) = match bc {
            BoundaryCondition::Dirichlet => (1, intervals - 1),
            BoundaryCondition::Robin => (0, intervals + 1),
        };
        let inv = 1.0 / (dx * dx);
        let mut d = DMatrix::zeros(len, len);
        for i in 0..len {
            d[(i, i)] = -2.0 * inv;
            if i > 0 {
                d[(i, i - 1)] = inv;
            }
            if i + 1 < len {
                d[(i, i + 1)] = inv;
            }
        }
        let mut w = DVector::from_element(len, 1.0);
        if bc == BoundaryCondition::Robin && len > 1 {
            // ghost nodes eliminated with the Robin relation
            d[(0, 1)] = 2.0 * inv;
            d[(len - 1, len - 2)] = 2.0 * inv;
            d[(0, 0)] -= 2.0 * dx * beta * inv;
            d[(len - 1, len - 1)] -= 2.0 * dx * beta * inv;
            w[0] = 0.5;
            w[len - 1] = 0.5;
        }
        let sw = w.map(f64::sqrt);
        let sym = DMatrix::from_fn(len, len, |i, j| sw[i] * d[(i, j)] / sw[j]);
        let sym = (&sym + sym.transpose()) * 0.5;
        let e = SymmetricEigen::new(sym);
        let p = DMatrix::from_fn(len, len, |i, j| e.eigenvectors[(i, j)] / sw[i]);
        let p_inv = DMatrix::from_fn(len, len, |i, j| e.eigenvectors[(j, i)] * sw[j]);
        Self {
            first,
            len,
            d,
            p,
            p_inv,
            lambda: e.eigenvalues,
        }
    }
}

#[derive(Debug, Clone)]
struct ComponentFd {
    gamma: f64,
    x: AxisFd,
    y: AxisFd,
}

impl ComponentFd {
    fn active(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        u.view((self.x.first, self.y.first), (self.x.len, self.y.len))
            .into_owned()
    }

    fn laplacian(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.x.d * a + a * self.y.d.transpose()
    }

    /// `(I − α Δ) X = R` on the active block.
    fn solve(&self, alpha: f64, r: &DMatrix<f64>) -> DMatrix<f64> {
        if alpha == 0.0 {
            return r.clone();
        }
        let mut t = &self.x.p_inv * r * self.y.p_inv.transpose();
        for j in 0..t.ncols() {
            for i in 0..t.nrows() {
                t[(i, j)] /= 1.0 - alpha * (self.x.lambda[i] + self.y.lambda[j]);
            }
        }
        &self.x.p * t * self.y.p.transpose()
    }
}

/// Snapshot of the reference solution on the full node lattice.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub fields: [DMatrix<f64>; 2],
}

/// Max-norm comparison of the reference against a closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub max_abs_error: [f64; 2],
    pub max_abs_exact: [f64; 2],
}

impl Validation {
    /// `max |w_fd − w| / max |w|` over both components and every node.
    pub fn relative(&self) -> f64 {
        let err = self.max_abs_error[0].max(self.max_abs_error[1]);
        let size = self.max_abs_exact[0].max(self.max_abs_exact[1]);
        err / size.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    pub snapshots: Vec<Snapshot>,
    pub validation: Option<Validation>,
    pub max_picard_iterations: usize,
}

impl OracleSolution {
    fn dx(&self) -> f64 {
        self.domain.width() / self.nx as f64
    }

    fn dy(&self) -> f64 {
        self.domain.height() / self.ny as f64
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.domain.x_min + i as f64 * self.dx(),
            self.domain.y_min + j as f64 * self.dy(),
        ]
    }

    fn bilinear(&self, s: &Snapshot, x: f64, y: f64) -> [f64; 2] {
        let fx = ((x - self.domain.x_min) / self.dx()).clamp(0.0, self.nx as f64);
        let fy = ((y - self.domain.y_min) / self.dy()).clamp(0.0, self.ny as f64);
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        let (a, b) = (fx - i as f64, fy - j as f64);
        [0, 1].map(|k| {
            let f = &s.fields[k];
            (1.0 - a) * (1.0 - b) * f[(i, j)]
                + a * (1.0 - b) * f[(i + 1, j)]
                + (1.0 - a) * b * f[(i, j + 1)]
                + a * b * f[(i + 1, j + 1)]
        })
    }

    /// Bilinear in space, linear between stored snapshots in time.
    pub fn sample(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let k = self.snapshots.partition_point(|s| s.time < t);
        if k == 0 {
            return self.bilinear(&self.snapshots[0], x, y);
        }
        if k == self.snapshots.len() {
            return self.bilinear(self.snapshots.last().unwrap(), x, y);
        }
        let (s0, s1) = (&self.snapshots[k - 1], &self.snapshots[k]);
        let th = (t - s0.time) / (s1.time - s0.time);
        let (a, b) = (self.bilinear(s0, x, y), self.bilinear(s1, x, y));
        [0, 1].map(|c| (1.0 - th) * a[c] + th * b[c])
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("at least the initial snapshot")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Keep every `store_every`-th step (the final step is always kept).
    pub store_every: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { store_every: 1 }
    }
}

/// Reference solution on an `nx × nx` cell lattice with `nt` equal steps.
pub fn oracle_solve(problem: &ProblemSpec, nx: usize, nt: usize) -> Result<OracleSolution> {
    oracle_solve_with(problem, nx, nx, nt, OracleOptions::default())
}

pub fn oracle_solve_with(
    problem: &ProblemSpec,
    nx: usize,
    ny: usize,
    nt: usize,
    options: OracleOptions,
) -> Result<OracleSolution> {
    problem.validate()?;
    if nx < 2 || ny < 2 || nt == 0 || options.store_every == 0 {
        return Err(Error::InvalidArgument(
            "reference solver needs nx, ny ≥ 2, nt ≥ 1 and a positive store stride".into(),
        ));
    }
    let d = problem.domain;
    let (dx, dy) = (d.width() / nx as f64, d.height() / ny as f64);
    let dt = problem.t_final / nt as f64;
    let p = problem.params;
    let comps = [0, 1].map(|k| ComponentFd {
        gamma: p.gamma[k],
        x: AxisFd::new(nx, dx, problem.bc[k], p.beta[k]),
        y: AxisFd::new(ny, dy, problem.bc[k], p.beta[k]),
    });
    let xs: Vec<f64> = (0..=nx).map(|i| d.x_min + i as f64 * dx).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| d.y_min + j as f64 * dy).collect();

    let mask = |u: &mut [DMatrix<f64>; 2]| {
        for k in 0..2 {
            if problem.bc[k] == BoundaryCondition::Dirichlet {
                u[k].row_mut(0).fill(0.0);
                u[k].row_mut(nx).fill(0.0);
                u[k].column_mut(0).fill(0.0);
                u[k].column_mut(ny).fill(0.0);
            }
        }
    };
    let forcing = |u: &[DMatrix<f64>; 2], t: f64| -> [DMatrix<f64>; 2] {
        let mut out = [DMatrix::zeros(nx + 1, ny + 1), DMatrix::zeros(nx + 1, ny + 1)];
        for j in 0..=ny {
            for i in 0..=nx {
                let w = [u[0][(i, j)], u[1][(i, j)]];
                let f = reaction_F(w[0], w[1], &p);
                let s = problem.source_at(xs[i], ys[j], t, w);
                out[0][(i, j)] = f[0] + s[0];
                out[1][(i, j)] = f[1] + s[1];
            }
        }
        out
    };

    // initial data as averages over the dual cell of each node, so that a
    // jump through a node is seen as its midpoint value
    let rule = gauss_rule(4)?;
    let dual = |nodes: &[f64], i: usize, half: f64| {
        if i == 0 || i + 1 == nodes.len() {
            vec![(nodes[i], 1.0)]
        } else {
            rule.mapped(nodes[i] - half, nodes[i] + half).collect::<Vec<_>>()
        }
    };
    let mut u = [DMatrix::zeros(nx + 1, ny + 1), DMatrix::zeros(nx + 1, ny + 1)];
    for j in 0..=ny {
        let qy = dual(&ys, j, 0.5 * dy);
        let sy: f64 = qy.iter().map(|q| q.1).sum();
        for i in 0..=nx {
            let qx = dual(&xs, i, 0.5 * dx);
            let sx: f64 = qx.iter().map(|q| q.1).sum();
            let mut acc = [0.0; 2];
            for &(y, wyy) in &qy {
                for &(x, wxx) in &qx {
                    let w = (problem.initial)(x, y);
                    acc[0] += wxx * wyy * w[0];
                    acc[1] += wxx * wyy * w[1];
                }
            }
            u[0][(i, j)] = acc[0] / (sx * sy);
            u[1][(i, j)] = acc[1] / (sx * sy);
        }
    }
    mask(&mut u);

    let mut validation = problem.exact.as_ref().map(|_| Validation {
        max_abs_error: [0.0; 2],
        max_abs_exact: [0.0; 2],
    });
    let validate = |u: &[DMatrix<f64>; 2], t: f64, v: &mut Option<Validation>| {
        if let (Some(val), Some(exact)) = (v.as_mut(), problem.exact.as_ref()) {
            for j in 0..=ny {
                for i in 0..=nx {
                    let e = exact(xs[i], ys[j], t);
                    for k in 0..2 {
                        val.max_abs_error[k] = val.max_abs_error[k].max((u[k][(i, j)] - e[k]).abs());
                        val.max_abs_exact[k] = val.max_abs_exact[k].max(e[k].abs());
                    }
                }
            }
        }
    };
    validate(&u, 0.0, &mut validation);

    let mut snapshots = vec![Snapshot {
        time: 0.0,
        fields: u.clone(),
    }];
    let mut max_iterations = 0;
    for n in 0..nt {
        let t0 = n as f64 * dt;
        let t1 = if n + 1 == nt {
            problem.t_final
        } else {
            (n + 1) as f64 * dt
        };
        let f0 = forcing(&u, t0);
        let base: [DMatrix<f64>; 2] = [0, 1].map(|k| {
            let c = &comps[k];
            let a = c.active(&u[k]);
            let mut b = &a + c.active(&f0[k]) * (0.5 * dt);
            if c.gamma > 0.0 {
                b += c.laplacian(&a) * (0.5 * dt * c.gamma);
            }
            b
        });

        let mut next = u.clone();
        let mut converged = false;
        for it in 1..=PICARD_MAX_ITERATIONS {
            let f1 = forcing(&next, t1);
            let mut change = 0.0f64;
            let mut size = 1.0f64;
            let mut candidate = next.clone();
            for k in 0..2 {
                let c = &comps[k];
                let r = &base[k] + c.active(&f1[k]) * (0.5 * dt);
                let x = c.solve(0.5 * dt * c.gamma, &r);
                let mut view = candidate[k].view_mut((c.x.first, c.y.first), (c.x.len, c.y.len));
                for j in 0..c.y.len {
                    for i in 0..c.x.len {
                        change = change.max((x[(i, j)] - view[(i, j)]).abs());
                        size = size.max(x[(i, j)].abs());
                        view[(i, j)] = x[(i, j)];
                    }
                }
            }
            if !change.is_finite() {
                return Err(Error::OracleFailure {
                    step: n,
                    reason: "non-finite iterate".into(),
                });
            }
            next = candidate;
            if change <= PICARD_TOLERANCE * size {
                max_iterations = max_iterations.max(it);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::OracleFailure {
                step: n,
                reason: format!("Picard iteration did not converge in {PICARD_MAX_ITERATIONS} iterations"),
            });
        }
        u = next;
        validate(&u, t1, &mut validation);
        if (n + 1) % options.store_every == 0 || n + 1 == nt {
            snapshots.push(Snapshot {
                time: t1,
                fields: u.clone(),
            });
        }
    }

    Ok(OracleSolution {
        domain: d,
        nx,
        ny,
        snapshots,
        validation,
        max_picard_iterations: max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FhnParams;

    #[test]
    fn zero_problem_stays_zero() {
        let p = ProblemSpec::zero(
            Domain::square(0.0, 1.0).unwrap(),
            0.5,
            FhnParams::default(),
            [BoundaryCondition::Dirichlet, BoundaryCondition::Robin],
        );
        let sol = oracle_solve(&p, 8, 4).unwrap();
        for s in &sol.snapshots {
            assert!(s.fields.iter().all(|f| f.iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn robin_axis_operator_is_diagonalized() {
        let a = AxisFd::new(6, 0.2, BoundaryCondition::Robin, 0.7);
        let rebuilt = &a.p * DMatrix::from_diagonal(&a.lambda) * &a.p_inv;
        assert!((rebuilt - &a.d).abs().max() < 1e-10);
        assert!(a.lambda.max() <= 1e-12);
    }
}
