//! Predictor–corrector time stepping.
//!
//! The predictor advances explicitly from `t_n` to `t_{n+1/2}` using a
//! three-point nonuniform derivative stencil; the corrector advances from
//! `t_{n+1/2}` to `t_{n+1}` with a BDF2-type stencil on half steps, implicit
//! in the linear operator and with the reaction extrapolated as
//! `2F^{n+1/2} − F^n`.

use std::time::Instant;

use crate::basis::{build_spline_space, orthonormalize, BasisSet, Coefficients, GridField};
use crate::error::{invalid, Error, Phase, Result};
use crate::forms::l2_project;
use crate::mesh::{build_collocation, build_mesh, gauss_rule, CollocationGrid, Mesh};
use crate::model::{reaction_F, ProblemSpec};
use crate::operators::{assemble_operators, AssembledOperators, SolveInfo};
use crate::timegrid::{Level, TimeGrid};

/// Mesh, collocation grid and orthonormal basis for one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub grid: CollocationGrid,
    pub basis: BasisSet,
}

impl Discretization {
    pub fn new(problem: &ProblemSpec, h: f64, degree: usize, gauss_points: usize) -> Result<Self> {
        let mesh = build_mesh(problem.domain, h)?;
        Self::on_mesh(problem, mesh, degree, gauss_points)
    }

    pub fn on_mesh(problem: &ProblemSpec, mesh: Mesh, degree: usize, gauss_points: usize) -> Result<Self> {
        let grid = build_collocation(&mesh, &gauss_rule(gauss_points)?);
        let space = build_spline_space(&mesh, degree)?.with_traces(problem.traces());
        let basis = orthonormalize(&space, &grid)?;
        Ok(Self { mesh, grid, basis })
    }
}

/// Weights `(a, b, c)` with `w_t(t_n) ≈ a w^{n+1/2} + b w^n + c w^{n−1/2}`.
pub fn stencil_predictor_dt(tau_n: f64, tau_prev: f64) -> Result<(f64, f64, f64)> {
    if !(tau_n > 0.0) || !(tau_prev > 0.0) {
        return Err(invalid(format!("steps must be positive, got {tau_n} and {tau_prev}")));
    }
    let s = tau_n + tau_prev;
    Ok((
        tau_prev / (tau_n * s),
        (tau_n - tau_prev) / (tau_n * tau_prev),
        -tau_n / (tau_prev * s),
    ))
}

/// Weights `(a, b, c)` with `w_t(t_{n+1}) ≈ a w^{n+1} + b w^{n+1/2} + c w^n`.
pub fn stencil_corrector_dt(tau_n: f64) -> Result<(f64, f64, f64)> {
    if !(tau_n > 0.0) {
        return Err(invalid(format!("step must be positive, got {tau_n}")));
    }
    Ok((1.5 / tau_n, -2.0 / tau_n, 0.5 / tau_n))
}

/// `2 F^{n+1/2} − F^n`
#[allow(non_snake_case)]
pub fn extrapolate_F(f_half: &[f64], f_n: &[f64]) -> Result<Vec<f64>> {
    if f_half.len() != f_n.len() {
        return Err(invalid("extrapolation operands differ in length"));
    }
    Ok(f_half.iter().zip(f_n).map(|(a, b)| 2.0 * a - b).collect())
}

/// Spectral radius of the one-step map of the scheme applied to
/// `y' = −λy` with equal local steps, as a function of `z = τλ`.
pub fn scalar_amplification(z: f64) -> f64 {
    // state (y^n, y^{n−1/2}) ↦ (y^{n+1}, y^{n+1/2})
    let d = 3.0 + 2.0 * z;
    let m = [[(-8.0 * z - 1.0) / d, 4.0 / d], [-2.0 * z, 1.0]];
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
    } else {
        det.abs().sqrt()
    }
}

/// Largest equal local step for which the linear part of the scheme is
/// stable: `τ λ_max ≤ 1`.
pub fn critical_step(ops: &AssembledOperators) -> f64 {
    let l = ops.lambda_max();
    if l > 0.0 {
        1.0 / l
    } else {
        f64::INFINITY
    }
}

/// Evaluates the problem's nonlinear part on the grid: reaction plus source,
/// projected on the basis. `P(F(w_h) + s)`.
pub struct Forcing<'a> {
    pub problem: &'a ProblemSpec,
    pub basis: &'a BasisSet,
    pub grid: &'a CollocationGrid,
}

impl Forcing<'_> {
    pub fn project_values(&self, values: &GridField, t: f64) -> Coefficients {
        let p = &self.problem.params;
        let mut out = GridField::zeros(self.grid);
        let xs = &self.grid.x_axis.nodes;
        let ys = &self.grid.y_axis.nodes;
        for (q, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                let w = [values.blocks[0][(i, q)], values.blocks[1][(i, q)]];
                let f = reaction_F(w[0], w[1], p);
                let s = self.problem.source_at(x, y, t, w);
                out.blocks[0][(i, q)] = f[0] + s[0];
                out.blocks[1][(i, q)] = f[1] + s[1];
            }
        }
        self.basis.project_grid(&out)
    }

    pub fn project(&self, c: &Coefficients, t: f64) -> Coefficients {
        self.project_values(&self.basis.evaluate_grid(c), t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub init_tolerance: f64,
    pub init_max_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            init_tolerance: 1e-12,
            init_max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub c0: Coefficients,
    pub c_half: Coefficients,
    pub iterations: usize,
    pub last_change: f64,
}

/// `c⁰ = P w₀`; `c^{1/2}` from the implicit trapezoid rule over `[t_0, t_{1/2}]`
/// `y = c⁰ + (τ₀/2)[G(w₀, t_0) + G(y, t_{1/2}) − K(c⁰ + y)]`,
/// iterated on `G` with the linear part solved exactly.
pub fn initialize(
    problem: &ProblemSpec,
    disc: &Discretization,
    ops: &AssembledOperators,
    tau0: f64,
    config: &RunConfig,
) -> Result<Initialization> {
    if !(tau0 > 0.0) {
        return Err(invalid(format!("initial step must be positive, got {tau0}")));
    }
    let forcing = Forcing {
        problem,
        basis: &disc.basis,
        grid: &disc.grid,
    };
    let init = problem.initial.clone();
    let c0 = l2_project(move |x, y| init(x, y), &disc.basis, &disc.grid)?;
    let w0 = GridField::sample(&disc.grid, |x, y| (problem.initial)(x, y));
    let g0 = forcing.project_values(&w0, 0.0);
    let half = 0.5 * tau0;
    let t_half = tau0;

    let mut base = c0.clone();
    base.axpy(-half, &ops.apply(&c0));
    base.axpy(half, &g0);

    let mut y = c0.clone();
    let mut change = f64::INFINITY;
    for it in 1..=config.init_max_iterations {
        let gy = forcing.project(&y, t_half);
        let mut rhs = base.clone();
        rhs.axpy(half, &gy);
        let (next, _) = ops.solve_shifted(half, &rhs, 0, Phase::Initialization)?;
        if !next.is_finite() {
            return Err(Error::BlowUp {
                step: 0,
                phase: Phase::Initialization,
            });
        }
        change = (&next - &y).norm() / next.norm().max(1.0);
        y = next;
        if change <= config.init_tolerance {
            return Ok(Initialization {
                c0,
                c_half: y,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::InitializationFailure {
        iterations: config.init_max_iterations,
        residual: change,
    })
}

/// Explicit predictor. `g_n = P(F(w_h^n) + s^n)`.
pub fn predictor_step(
    ops: &AssembledOperators,
    c_n: &Coefficients,
    c_prev_half: &Coefficients,
    g_n: &Coefficients,
    tau_n: f64,
    tau_prev: f64,
) -> Result<Coefficients> {
    stencil_predictor_dt(tau_n, tau_prev)?;
    let r = tau_n / tau_prev;
    let mut drive = g_n - &ops.apply(c_n);
    drive = drive.scaled(tau_n * (tau_n + tau_prev) / tau_prev);
    drive.axpy(-(r * r - 1.0), c_n);
    drive.axpy(r * r, c_prev_half);
    Ok(drive)
}

/// Linearized implicit corrector.
pub fn corrector_step(
    ops: &AssembledOperators,
    c_n: &Coefficients,
    c_half: &Coefficients,
    g_n: &Coefficients,
    g_half: &Coefficients,
    tau_n: f64,
    step: usize,
) -> Result<(Coefficients, SolveInfo)> {
    stencil_corrector_dt(tau_n)?;
    let a = 2.0 * tau_n / 3.0;
    let rhs = Coefficients::combination(&[(4.0 / 3.0, c_half), (-1.0 / 3.0, c_n), (2.0 * a, g_half), (-a, g_n)]);
    ops.solve_shifted(a, &rhs, step, Phase::Corrector)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub phase: Phase,
    pub time: f64,
    pub solve_iterations: usize,
    pub residual: f64,
    /// Discrete norms of `u_h` and `v_h` after the phase.
    pub norms: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub levels: Vec<Level>,
    pub states: Vec<Coefficients>,
}

impl Trajectory {
    pub fn final_state(&self) -> &Coefficients {
        self.states.last().expect("trajectory is never empty")
    }

    /// Final state and the time of the first level at or after `t`.
    pub fn at_time(&self, t: f64) -> Option<(&Level, &Coefficients)> {
        let slack = 1e-12 * self.levels.last()?.time.max(1.0);
        self.levels
            .iter()
            .zip(&self.states)
            .find(|(l, _)| (l.time - t).abs() <= slack)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<StepReport>,
    pub init_iterations: usize,
    pub wall_seconds: f64,
}

fn check_finite(c: &Coefficients, step: usize, phase: Phase) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::BlowUp { step, phase })
    }
}

/// Runs the scheme over `times`, calling `observe` at every level in time
/// order (macro nodes and midpoints).
pub fn run_with(
    problem: &ProblemSpec,
    disc: &Discretization,
    times: &TimeGrid,
    config: &RunConfig,
    mut observe: impl FnMut(&Level, &Coefficients) -> Result<()>,
) -> Result<RunOutput> {
    problem.validate()?;
    times.check()?;
    let start = Instant::now();
    let ops = assemble_operators(&disc.basis, &problem.params);
    let forcing = Forcing {
        problem,
        basis: &disc.basis,
        grid: &disc.grid,
    };
    let levels = times.levels();
    let mut reports = Vec::with_capacity(2 * times.steps());
    let norms = |c: &Coefficients| [c.component_norm(0), c.component_norm(1)];

    let init = initialize(problem, disc, &ops, times.tau(0), config)?;
    let init_iterations = init.iterations;
    observe(&levels[0], &init.c0)?;
    observe(&levels[1], &init.c_half)?;
    reports.push(StepReport {
        step: 0,
        phase: Phase::Initialization,
        time: levels[1].time,
        solve_iterations: init.iterations,
        residual: init.last_change,
        norms: norms(&init.c_half),
    });

    let mut c_n = init.c0;
    let mut c_half = init.c_half;
    let mut g_n = forcing.project(&c_n, times.nodes[0]);
    for n in 0..times.steps() {
        let tau = times.tau(n);
        if n > 0 {
            let tau_prev = times.tau(n - 1);
            g_n = forcing.project(&c_n, times.nodes[n]);
            c_half = predictor_step(&ops, &c_n, &c_half, &g_n, tau, tau_prev)?;
            check_finite(&c_half, n, Phase::Predictor)?;
            reports.push(StepReport {
                step: n,
                phase: Phase::Predictor,
                time: levels[2 * n + 1].time,
                solve_iterations: 0,
                residual: 0.0,
                norms: norms(&c_half),
            });
            observe(&levels[2 * n + 1], &c_half)?;
        }
        let g_half = forcing.project(&c_half, times.midpoint(n));
        let (next, info) = corrector_step(&ops, &c_n, &c_half, &g_n, &g_half, tau, n)?;
        check_finite(&next, n, Phase::Corrector)?;
        reports.push(StepReport {
            step: n,
            phase: Phase::Corrector,
            time: levels[2 * n + 2].time,
            solve_iterations: info.iterations,
            residual: info.relative_residual,
            norms: norms(&next),
        });
        observe(&levels[2 * n + 2], &next)?;
        c_n = next;
    }
    Ok(RunOutput {
        reports,
        init_iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the scheme and keeps every level.
pub fn run(
    problem: &ProblemSpec,
    disc: &Discretization,
    times: &TimeGrid,
    config: &RunConfig,
) -> Result<(Trajectory, RunOutput)> {
    let mut traj = Trajectory {
        levels: Vec::new(),
        states: Vec::new(),
    };
    let out = run_with(problem, disc, times, config, |l, c| {
        traj.levels.push(*l);
        traj.states.push(c.clone());
        Ok(())
    })?;
    Ok((traj, out))
}
