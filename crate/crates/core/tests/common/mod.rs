#![allow(dead_code)]

use std::sync::Arc;

use fhn_osc::basis::{build_spline_space, orthonormalize, BasisSet, Coefficients, Trace};
use fhn_osc::forms::{integration_by_parts_terms, jump_form, l2_project, norm_dot, norm_grad, FaceTrace, FieldValues};
use fhn_osc::mesh::{build_collocation, gauss_rule, CollocationGrid, Domain, Mesh};
use fhn_osc::model::{cubic, lipschitz_constant_CF, reaction_F, BoundaryCondition, FhnParams, ProblemSpec};
use fhn_osc::operators::{assemble_operators, AssembledOperators};
use fhn_osc::Phase;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub struct Setup {
    pub mesh: Mesh,
    pub grid: CollocationGrid,
    pub basis: BasisSet,
}

pub fn setup(domain: Domain, nx: usize, ny: usize, m: usize, l: usize, traces: [Trace; 2]) -> Setup {
    let mesh = Mesh::uniform(domain, nx, ny).unwrap();
    let grid = build_collocation(&mesh, &gauss_rule(l).unwrap());
    let basis = orthonormalize(&build_spline_space(&mesh, m).unwrap().with_traces(traces), &grid).unwrap();
    Setup { mesh, grid, basis }
}

pub fn unit_square() -> Domain {
    Domain::square(0.0, 1.0).unwrap()
}

pub fn random_coefficients(basis: &BasisSet, rng: &mut StdRng) -> Coefficients {
    let v: Vec<f64> = (0..basis.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Coefficients::from_vector(basis, &v).unwrap()
}

/// `x²(3 − 2x)`: zero slope at both ends of `[0, 1]`.
pub fn cubic_flat(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

pub fn cubic_flat_d1(x: f64) -> f64 {
    6.0 * x - 6.0 * x * x
}

pub fn cubic_flat_d2(x: f64) -> f64 {
    6.0 - 12.0 * x
}

/// `x²(1 − x)²`
pub fn quartic_flat(x: f64) -> f64 {
    x * x * (1.0 - x) * (1.0 - x)
}

pub fn quartic_flat_d2(x: f64) -> f64 {
    2.0 - 12.0 * x + 12.0 * x * x
}

/// Largest entry of `|G − I|` for the Gram matrix of every basis function,
/// tabulated directly from the splines at the collocation points.
pub fn orthonormality_defect(basis: &BasisSet, grid: &CollocationGrid) -> f64 {
    let pts: Vec<[f64; 2]> = grid.points.iter().map(|p| [p.x, p.y]).collect();
    let t = basis.eval_basis(&pts).unwrap();
    let mut wv = t.values.clone();
    for (j, p) in grid.points.iter().enumerate() {
        wv.column_mut(j).scale_mut(p.weight);
    }
    let mut g = &t.values * wv.transpose();
    // functions of different components are orthogonal by construction
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if t.component[i] != t.component[j] {
                g[(i, j)] = 0.0;
            }
        }
    }
    (g - DMatrix::identity(basis.dim(), basis.dim())).amax()
}

/// `max |P(R(P f)) − P f| / max(1, max |P f|)`
pub fn projection_idempotence(basis: &BasisSet, grid: &CollocationGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
    let c = l2_project(f, basis, grid).unwrap();
    let again = basis.project_grid(&basis.evaluate_grid(&c));
    (&again - &c).max_abs() / c.max_abs().max(1.0)
}

/// Worst relative error of the collocation grid on monomials `x^a y^b`,
/// `a, b ≤ 2L − 1`, over a stretched rectangle.
pub fn quadrature_defect(l: usize, nx: usize, ny: usize) -> f64 {
    let (x0, x1, y0, y1) = (-0.5, 1.25, 0.25, 2.0);
    let mesh = Mesh::uniform(Domain::new(x0, x1, y0, y1).unwrap(), nx, ny).unwrap();
    let grid = build_collocation(&mesh, &gauss_rule(l).unwrap());
    let antiderivative = |lo: f64, hi: f64, k: i32| (hi.powi(k + 1) - lo.powi(k + 1)) / (k + 1) as f64;
    let mut worst = 0.0f64;
    for a in 0..(2 * l as i32) {
        for b in 0..(2 * l as i32) {
            let exact = antiderivative(x0, x1, a) * antiderivative(y0, y1, b);
            let got = grid.integrate(|x, y| x.powi(a) * y.powi(b));
            worst = worst.max((got - exact).abs() / exact.abs().max(1e-300));
        }
    }
    worst
}

/// `|⟨γ.*U, V⟩_·| / (norm_grad(U) · norm_dot(V))` for random `U`, `V` in the
/// spline space.
pub fn jump_defect(s: &Setup, gamma: [f64; 2], rng: &mut StdRng) -> f64 {
    let mut u = random_coefficients(&s.basis, rng);
    let v = random_coefficients(&s.basis, rng);
    let scale_ref = norm_grad(&FieldValues::from_coefficients(&s.basis, &u), &s.grid)
        * norm_dot(&FieldValues::from_coefficients(&s.basis, &v), &s.grid);
    for k in 0..2 {
        u.blocks[k] *= gamma[k];
    }
    let uj = FaceTrace::from_coefficients(&s.basis, &s.grid, &u).unwrap();
    let vj = FaceTrace::from_coefficients(&s.basis, &s.grid, &v).unwrap();
    jump_form(&uj, &vj, &s.grid).unwrap().abs() / scale_ref
}

/// Relative integration-by-parts residual for random `U`, `V`.
pub fn ibp_defect(s: &Setup, rng: &mut StdRng) -> f64 {
    let u = random_coefficients(&s.basis, rng);
    let v = random_coefficients(&s.basis, rng);
    let t = integration_by_parts_terms(&u, &v, &s.basis, &s.grid).unwrap();
    t.residual() / t.scale()
}

/// Largest observed `‖F(U) − F(V)‖ / ‖U − V‖` over random pairs, and the
/// closed-form constant.
pub fn lipschitz_check(p: &FhnParams, c_sup: f64, pairs: usize, rng: &mut StdRng) -> (f64, f64) {
    let rule = gauss_rule(6).unwrap();
    let cf = lipschitz_constant_CF(p, c_sup, 6, 6, rule.max_weight());
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let mut draw = || [0; 2].map(|_| rng.gen_range(-c_sup..=c_sup));
        let (a, b) = (draw(), draw());
        let fa = reaction_F(a[0], a[1], p);
        let fb = reaction_F(b[0], b[1], p);
        let num = ((fa[0] - fb[0]).powi(2) + (fa[1] - fb[1]).powi(2)).sqrt();
        let den = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    (worst, cf)
}

/// Linearity of the shifted solve: `S(a r₁ + b r₂) − a S(r₁) − b S(r₂)`,
/// relative to the size of the solutions.
pub fn superposition_defect(ops: &AssembledOperators, basis: &BasisSet, alpha: f64, rng: &mut StdRng) -> f64 {
    let r1 = random_coefficients(basis, rng);
    let r2 = random_coefficients(basis, rng);
    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let solve = |r: &Coefficients| ops.solve_shifted(alpha, r, 0, Phase::Corrector).unwrap().0;
    let mix = Coefficients::combination(&[(a, &r1), (b, &r2)]);
    let (x1, x2) = (solve(&r1), solve(&r2));
    let lhs = solve(&mix);
    let rhs = Coefficients::combination(&[(a, &x1), (b, &x2)]);
    (&lhs - &rhs).norm() / (a.abs() * x1.norm() + b.abs() * x2.norm())
}

pub fn small_operators(traces: [Trace; 2], params: &FhnParams) -> (Setup, AssembledOperators) {
    let s = setup(Domain::new(0.0, 1.5, -0.5, 0.5).unwrap(), 3, 4, 4, 6, traces);
    let ops = assemble_operators(&s.basis, params);
    (s, ops)
}

/// Source that cancels the whole reaction at the discrete state, so the
/// scheme sees a linear problem.
pub fn without_reaction(mut problem: ProblemSpec) -> ProblemSpec {
    let p = problem.params;
    problem.source = Some(Arc::new(move |_, _, _, w| {
        let f = reaction_F(w[0], w[1], &p);
        [-f[0], -f[1]]
    }));
    problem.exact = None;
    problem
}

/// Source that cancels only the cubic, leaving the linear coupling.
pub fn without_cubic(mut problem: ProblemSpec) -> ProblemSpec {
    let t3 = problem.params.theta3;
    problem.source = Some(Arc::new(move |_, _, _, w| [-cubic(w[0], t3), 0.0]));
    problem.exact = None;
    problem
}

/// Solution linear in time and polynomial of per-axis degree ≤ 4 with zero
/// normal derivatives on the unit square:
/// `u = (1 + 2t) X(x) X(y)`, `v = (0.5 − t) X(x) Q(y)`.
pub fn linear_in_time_problem(gamma: [f64; 2], t_final: f64) -> ProblemSpec {
    let params = FhnParams {
        gamma,
        ..FhnParams::default()
    };
    let exact = move |x: f64, y: f64, t: f64| {
        [
            (1.0 + 2.0 * t) * cubic_flat(x) * cubic_flat(y),
            (0.5 - t) * cubic_flat(x) * quartic_flat(y),
        ]
    };
    ProblemSpec {
        name: "linear-in-time".into(),
        domain: unit_square(),
        t_final,
        params,
        bc: [BoundaryCondition::Robin, BoundaryCondition::Robin],
        initial: Arc::new(move |x, y| exact(x, y, 0.0)),
        source: Some(Arc::new(move |x, y, t, _| {
            let w = exact(x, y, t);
            let wt = [2.0 * cubic_flat(x) * cubic_flat(y), -cubic_flat(x) * quartic_flat(y)];
            let lap = [
                (1.0 + 2.0 * t) * (cubic_flat_d2(x) * cubic_flat(y) + cubic_flat(x) * cubic_flat_d2(y)),
                (0.5 - t) * (cubic_flat_d2(x) * quartic_flat(y) + cubic_flat(x) * quartic_flat_d2(y)),
            ];
            let f = reaction_F(w[0], w[1], &params);
            [0, 1].map(|k| wt[k] - gamma[k] * lap[k] - f[k])
        })),
        exact: Some(Arc::new(exact)),
    }
}

/// Smooth solution with zero normal derivatives on the unit square:
/// `u = e^{−t} cos(πx) cos(2πy)`, `v = e^{t/2} cos(2πx) cos(πy)`.
pub fn smooth_problem(gamma: [f64; 2], t_final: f64) -> ProblemSpec {
    use std::f64::consts::PI;
    let params = FhnParams {
        gamma,
        ..FhnParams::default()
    };
    let exact = |x: f64, y: f64, t: f64| {
        [
            (-t).exp() * (PI * x).cos() * (2.0 * PI * y).cos(),
            (0.5 * t).exp() * (2.0 * PI * x).cos() * (PI * y).cos(),
        ]
    };
    ProblemSpec {
        name: "smooth".into(),
        domain: unit_square(),
        t_final,
        params,
        bc: [BoundaryCondition::Robin, BoundaryCondition::Robin],
        initial: Arc::new(move |x, y| exact(x, y, 0.0)),
        source: Some(Arc::new(move |x, y, t, _| {
            let w = exact(x, y, t);
            let wt = [-w[0], 0.5 * w[1]];
            let lap = [-5.0 * PI * PI * w[0], -5.0 * PI * PI * w[1]];
            let f = reaction_F(w[0], w[1], &params);
            [0, 1].map(|k| wt[k] - gamma[k] * lap[k] - f[k])
        })),
        exact: Some(Arc::new(exact)),
    }
}
