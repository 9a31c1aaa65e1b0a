mod common;

use fhn_osc::basis::{Coefficients, Trace};
use fhn_osc::forms::l2_project;
use fhn_osc::mesh::Domain;
use fhn_osc::model::{example_problem, BoundaryCondition, FhnParams, ProblemSpec};
use fhn_osc::operators::{assemble_operators, Term};
use fhn_osc::stepper::{corrector_step, critical_step, predictor_step, run, Discretization, Forcing, RunConfig};
use fhn_osc::timegrid::{build, build_graded, build_uniform, choose_n_for_target, GridMode, TimeGrid};
use nalgebra::{Cholesky, DVector, Matrix2, Vector2};
use proptest::prelude::*;
use rand::Rng;

fn mode() -> impl Strategy<Value = GridMode> {
    prop_oneof![Just(GridMode::Uniform), Just(GridMode::Graded)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn time_grid_invariants(m in mode(), t in 0.01..50.0f64, n in 2usize..400) {
        let g = build(m, t, n).unwrap();
        g.check().unwrap();
        let total: f64 = g.nodes.windows(2).map(|w| w[1] - w[0]).sum();
        prop_assert!((total - t).abs() <= 1e-13 * t.max(1.0));
        let lv = g.levels();
        prop_assert_eq!(lv.len(), 2 * n + 1);
        for k in 0..n {
            prop_assert!((g.midpoint(k) - g.nodes[k] - g.tau(k)).abs() <= 1e-14 * t.max(1.0));
        }
        if m == GridMode::Graded {
            for k in 1..n {
                prop_assert!(g.tau(k) > g.tau(k - 1));
            }
        }
    }

    #[test]
    fn chosen_step_count_is_minimal(m in mode(), t in 0.1..10.0f64, frac in 0.001..0.4f64) {
        let tau = frac * t;
        let n = choose_n_for_target(m, t, tau).unwrap();
        prop_assert!(build(m, t, n).unwrap().max_tau() <= tau * (1.0 + 1e-12));
        let floor = if m == GridMode::Graded { 2 } else { 1 };
        if n > floor {
            prop_assert!(build(m, t, n - 1).unwrap().max_tau() > tau);
        }
    }

    /// With the reaction cancelled by the source the scheme is linear in the
    /// initial data.
    #[test]
    fn run_is_linear_without_reaction(seed in any::<u64>(), graded in any::<bool>()) {
        let mut rng = common::rng(seed);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let k = [0; 4].map(|_| rng.gen_range(0.5..3.0));
        let mk = |init: fn(f64, f64, [f64; 4]) -> [f64; 2], scale: f64| {
            let mut p = common::without_reaction(ProblemSpec::zero(
                common::unit_square(), 0.05, FhnParams { gamma: [0.3, 0.1], beta: [0.5, 0.0], ..FhnParams::default() },
                [BoundaryCondition::Robin, BoundaryCondition::Dirichlet],
            ));
            p.initial = std::sync::Arc::new(move |x, y| init(x, y, k).map(|v| scale * v));
            p
        };
        let f1 = |x: f64, y: f64, k: [f64; 4]| [(k[0] * x).cos() * y, (k[1] * y).sin() * x * (1.0 - x)];
        let f2 = |x: f64, y: f64, k: [f64; 4]| [x * x - k[2] * y, (k[3] * x * y).sin() * y * (1.0 - y)];
        let p1 = mk(f1, 1.0);
        let p2 = mk(f2, 1.0);
        let mut p12 = mk(f1, 1.0);
        p12.initial = std::sync::Arc::new(move |x, y| {
            let (u, v) = (f1(x, y, k), f2(x, y, k));
            [a * u[0] + b * v[0], a * u[1] + b * v[1]]
        });
        let disc = Discretization::new(&p1, 0.25, 4, 6).unwrap();
        let ops = assemble_operators(&disc.basis, &p1.params);
        let tau = 0.5 * critical_step(&ops);
        let mode = if graded { GridMode::Graded } else { GridMode::Uniform };
        let times = build(mode, p1.t_final, choose_n_for_target(mode, p1.t_final, tau).unwrap()).unwrap();
        let cfg = RunConfig::default();
        let last = |p: &ProblemSpec| run(p, &disc, &times, &cfg).unwrap().0.final_state().clone();
        let (c1, c2, c12) = (last(&p1), last(&p2), last(&p12));
        let mix = Coefficients::combination(&[(a, &c1), (b, &c2)]);
        let scale = a.abs() * c1.norm() + b.abs() * c2.norm();
        prop_assert!((&c12 - &mix).norm() <= 1e-10 * scale);
    }
}

/// Independent recurrence for `c' = M c` per coefficient, following the
/// predictor, corrector and trapezoidal start.
fn ode_oracle(m: Matrix2<f64>, c0: Vector2<f64>, times: &TimeGrid) -> Vector2<f64> {
    let i = Matrix2::identity();
    let t0 = times.tau(0);
    let mut half = (i - m * (0.5 * t0)).try_inverse().unwrap() * (i + m * (0.5 * t0)) * c0;
    let mut c = c0;
    for n in 0..times.steps() {
        let tau = times.tau(n);
        if n > 0 {
            let tp = times.tau(n - 1);
            let r = tau / tp;
            half = c * (1.0 - r * r) + half * (r * r) + m * c * (tau * (tau + tp) / tp);
        }
        let a = 2.0 * tau / 3.0;
        c = half * (4.0 / 3.0) - c / 3.0 + (m * half * 2.0 - m * c) * a;
    }
    c
}

#[test]
fn zero_diffusion_reduces_to_the_scalar_recurrence() {
    let params = FhnParams {
        gamma: [0.0, 0.0],
        theta1: 0.8,
        theta2: 1.3,
        eps0: 0.6,
        ..FhnParams::default()
    };
    let mut problem = common::without_cubic(ProblemSpec::zero(
        Domain::new(0.0, 2.0, 0.0, 1.0).unwrap(),
        1.5,
        params,
        [BoundaryCondition::Robin, BoundaryCondition::Robin],
    ));
    problem.initial = std::sync::Arc::new(|x, y| [(x * y).sin() + 0.5, (2.0 * x).cos() * y]);
    let disc = Discretization::new(&problem, 0.5, 4, 6).unwrap();
    let ops = assemble_operators(&disc.basis, &problem.params);
    assert_eq!(ops.dense(Term::Full).amax(), 0.0);
    // F = (−v, ε₀(θ₁u − θ₂v))
    let m = Matrix2::new(0.0, -1.0, params.eps0 * params.theta1, -params.eps0 * params.theta2);
    for times in [build_uniform(1.5, 12).unwrap(), build_graded(1.5, 9).unwrap()] {
        let (traj, _) = run(&problem, &disc, &times, &RunConfig::default()).unwrap();
        let c0 = &traj.states[0];
        let end = traj.final_state();
        let mut worst = 0.0f64;
        for j in 0..c0.blocks[0].ncols() {
            for i in 0..c0.blocks[0].nrows() {
                let start = Vector2::new(c0.blocks[0][(i, j)], c0.blocks[1][(i, j)]);
                let want = ode_oracle(m, start, &times);
                let got = Vector2::new(end.blocks[0][(i, j)], end.blocks[1][(i, j)]);
                worst = worst.max((want - got).amax() / want.amax().max(1.0));
            }
        }
        assert!(worst <= 1e-10, "{} grid: worst deviation {worst:e}", times.mode);
    }
}

#[test]
fn predictor_matches_the_explicit_formula() {
    let params = FhnParams {
        gamma: [1.0, 0.4],
        beta: [0.7, 0.0],
        ..FhnParams::default()
    };
    let (s, ops) = common::small_operators([Trace::Free, Trace::Zero], &params);
    let k = ops.dense(Term::Full);
    let mut rng = common::rng(5);
    for &(tn, tp) in &[(0.01, 0.01), (0.013, 0.01), (0.2, 0.05)] {
        let cn = common::random_coefficients(&s.basis, &mut rng);
        let ch = common::random_coefficients(&s.basis, &mut rng);
        let g = common::random_coefficients(&s.basis, &mut rng);
        let got = DVector::from_vec(predictor_step(&ops, &cn, &ch, &g, tn, tp).unwrap().to_vector());
        let (vn, vh, vg) = (
            DVector::from_vec(cn.to_vector()),
            DVector::from_vec(ch.to_vector()),
            DVector::from_vec(g.to_vector()),
        );
        let r2 = (tn / tp) * (tn / tp);
        let want = &vn * (1.0 - r2) + &vh * r2 + (&vg - &k * &vn) * (tn * (tn + tp) / tp);
        assert!((got - &want).amax() <= 1e-12 * want.amax().max(1.0));
    }
    let zero = Coefficients::zeros(&s.basis);
    assert_eq!(predictor_step(&ops, &zero, &zero, &zero, 0.1, 0.1).unwrap(), zero);
    assert!(predictor_step(&ops, &zero, &zero, &zero, 0.1, 0.0).is_err());
}

/// Equal steps and the pure heat equation: one predictor step is the
/// leapfrog update `c^{n+1/2} = c^{n−1/2} − 2τ K c^n`.
#[test]
fn predictor_is_leapfrog_for_the_heat_equation() {
    let params = FhnParams {
        gamma: [1.0, 1.0],
        ..FhnParams::default()
    };
    let (s, ops) = common::small_operators([Trace::Free, Trace::Free], &params);
    let f = |x: f64, y: f64| [x * x * y, 1.0 - y * y];
    let cn = l2_project(f, &s.basis, &s.grid).unwrap();
    let ch = l2_project(|x, y| [x + y, x * y], &s.basis, &s.grid).unwrap();
    let zero = Coefficients::zeros(&s.basis);
    let tau = 1e-3;
    let got = predictor_step(&ops, &cn, &ch, &zero, tau, tau).unwrap();
    let k = ops.dense(Term::Full);
    let want = DVector::from_vec(ch.to_vector()) - &k * DVector::from_vec(cn.to_vector()) * (2.0 * tau);
    assert!((DVector::from_vec(got.to_vector()) - want).amax() <= 1e-13);
}

/// Stationary manufactured solution: the predictor and corrector both keep it.
#[test]
fn stationary_solution_is_kept() {
    let mut problem = common::linear_in_time_problem([1.0, 0.5], 1.0);
    let exact_now = problem.exact.clone().unwrap();
    // freeze the t = 0 profile: w_t = 0, so the source is −γΔw − F(w)
    let moving = common::linear_in_time_problem([1.0, 0.5], 1.0);
    let src = moving.source.clone().unwrap();
    problem.source = Some(std::sync::Arc::new(move |x, y, _, w| {
        let s = src(x, y, 0.0, w);
        [
            s[0] - 2.0 * common::cubic_flat(x) * common::cubic_flat(y),
            s[1] + common::cubic_flat(x) * common::quartic_flat(y),
        ]
    }));
    problem.exact = Some(std::sync::Arc::new(move |x, y, _| exact_now(x, y, 0.0)));
    let disc = Discretization::new(&problem, 0.25, 4, 6).unwrap();
    let ops = assemble_operators(&disc.basis, &problem.params);
    let c = l2_project(|x, y| (problem.initial)(x, y), &disc.basis, &disc.grid).unwrap();
    let forcing = Forcing {
        problem: &problem,
        basis: &disc.basis,
        grid: &disc.grid,
    };
    let g = forcing.project(&c, 0.3);
    let half = predictor_step(&ops, &c, &c, &g, 0.02, 0.015).unwrap();
    assert!((&half - &c).max_abs() <= 1e-9);
    let (next, _) = corrector_step(&ops, &c, &half, &g, &g, 0.02, 1).unwrap();
    assert!((&next - &c).max_abs() <= 1e-9);
}

/// Exact coefficients of a solution linear in time are reproduced by one
/// corrector step.
#[test]
fn corrector_is_exact_on_linear_in_time_solutions() {
    let problem = common::linear_in_time_problem([1.0, 0.5], 1.0);
    let disc = Discretization::new(&problem, 0.5, 4, 6).unwrap();
    let ops = assemble_operators(&disc.basis, &problem.params);
    let exact = problem.exact.clone().unwrap();
    let at = |t: f64| l2_project(|x, y| exact(x, y, t), &disc.basis, &disc.grid).unwrap();
    let forcing = Forcing {
        problem: &problem,
        basis: &disc.basis,
        grid: &disc.grid,
    };
    let (t, tau) = (0.3, 0.07);
    let (cn, ch) = (at(t), at(t + tau));
    let (gn, gh) = (forcing.project(&cn, t), forcing.project(&ch, t + tau));
    let (next, info) = corrector_step(&ops, &cn, &ch, &gn, &gh, tau, 4).unwrap();
    assert!((&next - &at(t + 2.0 * tau)).max_abs() <= 1e-9);
    assert!(info.relative_residual <= 1e-10);
    let zero = Coefficients::zeros(&disc.basis);
    let (z, _) = corrector_step(&ops, &zero, &zero, &zero, &zero, tau, 0).unwrap();
    assert_eq!(z, zero);
}

#[test]
fn corrector_system_is_positive_definite() {
    let problem = example_problem(2).unwrap();
    let disc = Discretization::new(&problem, 0.5, 4, 6).unwrap();
    let ops = assemble_operators(&disc.basis, &problem.params);
    let k = ops.dense(Term::Full);
    let sym = (&k + k.transpose()) * 0.5;
    assert!((&k - &sym).amax() <= 1e-9 * k.amax());
    let mut rng = common::rng(9);
    for _ in 0..10 {
        let tau: f64 = rng.gen_range(1e-6..=1.0);
        let system = nalgebra::DMatrix::identity(k.nrows(), k.ncols()) + &sym * (2.0 * tau / 3.0);
        assert!(Cholesky::new(system).is_some(), "not positive definite at tau = {tau}");
    }
}

#[test]
fn zero_problem_stays_zero() {
    let problem = ProblemSpec::zero(
        common::unit_square(),
        1.0,
        FhnParams::default(),
        [BoundaryCondition::Dirichlet, BoundaryCondition::Robin],
    );
    let disc = Discretization::new(&problem, 0.5, 4, 6).unwrap();
    let times = build_uniform(1.0, 2).unwrap();
    let (traj, out) = run(&problem, &disc, &times, &RunConfig::default()).unwrap();
    assert_eq!(traj.states.len(), 5);
    assert!(traj.states.iter().all(|c| c.max_abs() == 0.0));
    assert_eq!(out.reports.len(), 4);
}

#[test]
fn runs_are_deterministic() {
    let problem = example_problem(1).unwrap();
    let disc = Discretization::new(&problem, 0.5, 4, 6).unwrap();
    let times = build_graded(1.0, 6).unwrap();
    let a = run(&problem, &disc, &times, &RunConfig::default()).unwrap().0;
    let b = run(&problem, &disc, &times, &RunConfig::default()).unwrap().0;
    assert_eq!(a, b);
}

/// Discontinuous data on a coarser mesh than the acceptance run: finite and
/// bounded throughout.
#[test]
fn discontinuous_data_stays_bounded() {
    let problem = example_problem(3).unwrap();
    let disc = Discretization::new(&problem, 2.5 / 16.0, 4, 6).unwrap();
    let times = build_uniform(1.0, 32).unwrap();
    let (traj, out) = run(&problem, &disc, &times, &RunConfig::default()).unwrap();
    let norms: Vec<f64> = traj.states.iter().map(Coefficients::norm).collect();
    assert!(norms.iter().all(|v| v.is_finite()));
    assert!(norms.iter().cloned().fold(0.0, f64::max) <= 10.0 * norms[0]);
    assert!(out.reports.iter().all(|r| r.norms.iter().all(|v| v.is_finite())));
}
