//! FitzHugh–Nagumo reaction terms, parameters and the benchmark problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::basis::Trace;
use crate::error::{invalid, Result};
use crate::mesh::Domain;

/// Model parameters. Component 0 is `u`, component 1 is `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhnParams {
    pub gamma: [f64; 2],
    pub beta: [f64; 2],
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub eps0: f64,
    pub theta0: f64,
}

impl Default for FhnParams {
    fn default() -> Self {
        Self {
            gamma: [1.0, 1.0],
            beta: [0.0, 0.0],
            theta1: 1.0,
            theta2: 1.0,
            theta3: 0.5,
            eps0: 1.0,
            theta0: 0.0,
        }
    }
}

impl FhnParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma.iter().chain(&self.beta).all(|&g| g >= 0.0 && g.is_finite())
            && self.theta1 > 0.0
            && self.theta2 >= 0.0
            && self.theta3 > 0.0
            && self.theta3 < 1.0
            && self.eps0 >= 0.0
            && self.theta0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("parameters violate sign constraints: {self:?}")))
        }
    }
}

/// `f₁(u) = u(1 − u)(u − θ₃)`
pub fn cubic(u: f64, theta3: f64) -> f64 {
    u * (1.0 - u) * (u - theta3)
}

/// `F(u, v) = (f₁(u) − v, ε₀(θ₁u − θ₂v − θ₀))`
#[allow(non_snake_case)]
pub fn reaction_F(u: f64, v: f64, p: &FhnParams) -> [f64; 2] {
    [
        cubic(u, p.theta3) - v,
        p.eps0 * (p.theta1 * u - p.theta2 * v - p.theta0),
    ]
}

/// Closed-form Lipschitz constant of `F` on fields bounded by `c_sup`, for a
/// collocation rule with `l_points` per direction, `overlap` neighbouring
/// elements per collocation cell and largest Gauss weight `max_weight`.
#[allow(non_snake_case)]
pub fn lipschitz_constant_CF(p: &FhnParams, c_sup: f64, l_points: usize, overlap: usize, max_weight: f64) -> f64 {
    let s = (l_points * (overlap + 2)) as f64 * max_weight;
    let c2 = c_sup * c_sup;
    let inner = s * c2 + 1.5 + 2.0 * (1.0 + p.theta3).powi(2);
    let sq = 2.0 * (1.0 + p.theta1.powi(2).max(p.theta2.powi(2)) + 10.0 * s * c2 * inner);
    sq.sqrt()
}

/// Boundary condition of one component. Dirichlet data is homogeneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `∂w/∂n = −β w` with `β` taken from the parameters.
    Robin,
    Dirichlet,
}

impl BoundaryCondition {
    pub fn trace(self) -> Trace {
        match self {
            BoundaryCondition::Robin => Trace::Free,
            BoundaryCondition::Dirichlet => Trace::Zero,
        }
    }
}

pub type InitialFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
/// `s(x, y, t, [u_h, v_h])`; the discrete state lets a source cancel the
/// reaction term at the solver level.
pub type SourceFn = Arc<dyn Fn(f64, f64, f64, [f64; 2]) -> [f64; 2] + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub t_final: f64,
    pub params: FhnParams,
    pub bc: [BoundaryCondition; 2],
    pub initial: InitialFn,
    pub source: Option<SourceFn>,
    pub exact: Option<ExactFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("params", &self.params)
            .field("bc", &self.bc)
            .field("source", &self.source.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(invalid(format!("final time must be positive, got {}", self.t_final)));
        }
        self.params.validate()?;
        let d = self.domain;
        for &(x, y) in &[
            (d.x_min, d.y_min),
            (d.x_max, d.y_max),
            (d.x_min, d.y_max),
            (d.x_max, d.y_min),
        ] {
            let [a, b] = (self.initial)(x, y);
            if !a.is_finite() || !b.is_finite() {
                return Err(invalid("initial data is not finite on the boundary"));
            }
        }
        Ok(())
    }

    pub fn traces(&self) -> [Trace; 2] {
        [self.bc[0].trace(), self.bc[1].trace()]
    }

    pub fn source_at(&self, x: f64, y: f64, t: f64, w: [f64; 2]) -> [f64; 2] {
        match &self.source {
            Some(s) => s(x, y, t, w),
            None => [0.0, 0.0],
        }
    }

    /// Problem with zero data, zero sources and the given parameters.
    pub fn zero(domain: Domain, t_final: f64, params: FhnParams, bc: [BoundaryCondition; 2]) -> Self {
        Self {
            name: "zero".into(),
            domain,
            t_final,
            params,
            bc,
            initial: Arc::new(|_, _| [0.0, 0.0]),
            source: None,
            exact: Some(Arc::new(|_, _, _| [0.0, 0.0])),
        }
    }
}

pub fn example_problem(id: u32) -> Result<ProblemSpec> {
    match id {
        1 => Ok(example1()),
        2 => Ok(example2()),
        3 => Ok(example3()),
        _ => Err(invalid(format!("unknown example {id}; expected 1, 2 or 3"))),
    }
}

fn example1() -> ProblemSpec {
    let params = FhnParams {
        gamma: [1.0, 0.0],
        ..FhnParams::default()
    };
    let s2 = |x: f64, y: f64| (2.0 * x).sin() * (2.0 * y).sin();
    let s1 = |x: f64, y: f64| x.sin() * y.sin();
    let theta3 = params.theta3;
    ProblemSpec {
        name: "example-1".into(),
        domain: Domain::square(0.0, PI).expect("valid domain"),
        t_final: 1.0,
        params,
        bc: [BoundaryCondition::Dirichlet, BoundaryCondition::Robin],
        initial: Arc::new(move |x, y| [s2(x, y), s1(x, y)]),
        source: Some(Arc::new(move |x, y, t, w| {
            let t2 = t * t;
            let t3 = t2 * t;
            [
                (8.0 * t3 + 3.0 * t2 + 8.0) * s2(x, y) - cubic(w[0], theta3) + (t3 + 1.0) * s1(x, y),
                (t3 + 3.0 * t2 + 1.0) * s1(x, y) - (t3 + 1.0) * s2(x, y),
            ]
        })),
        exact: Some(Arc::new(move |x, y, t| {
            let a = t * t * t + 1.0;
            [a * s2(x, y), a * s1(x, y)]
        })),
    }
}

fn example2() -> ProblemSpec {
    let params = FhnParams {
        gamma: [0.0, 1.0],
        ..FhnParams::default()
    };
    let u = |x: f64, y: f64, t: f64| t.exp() * (PI * x).cos() * (3.0 * PI * y).cos();
    let v = |x: f64, y: f64, t: f64| (2.0 * t).exp() * (2.0 * PI * x).cos() * (4.0 * PI * y).cos();
    let p = params;
    ProblemSpec {
        name: "example-2".into(),
        domain: Domain::square(-1.0, 1.0).expect("valid domain"),
        t_final: 2.0,
        params,
        bc: [BoundaryCondition::Robin, BoundaryCondition::Robin],
        initial: Arc::new(move |x, y| [u(x, y, 0.0), v(x, y, 0.0)]),
        source: Some(Arc::new(move |x, y, t, _| {
            let (ue, ve) = (u(x, y, t), v(x, y, t));
            let lap_u = -10.0 * PI * PI * ue;
            let lap_v = -20.0 * PI * PI * ve;
            let [f1, f2] = reaction_F(ue, ve, &p);
            // u_t = u, v_t = 2v
            [ue - p.gamma[0] * lap_u - f1, 2.0 * ve - p.gamma[1] * lap_v - f2]
        })),
        exact: Some(Arc::new(move |x, y, t| [u(x, y, t), v(x, y, t)])),
    }
}

fn example3() -> ProblemSpec {
    let params = FhnParams {
        gamma: [1e-4, 0.0],
        beta: [0.0, 0.0],
        theta1: 0.5,
        theta2: 1.0,
        theta3: 1e-2,
        eps0: 1e-2,
        theta0: 0.0,
    };
    ProblemSpec {
        name: "example-3".into(),
        domain: Domain::square(0.0, 2.5).expect("valid domain"),
        t_final: 1.0,
        params,
        bc: [BoundaryCondition::Dirichlet, BoundaryCondition::Robin],
        initial: Arc::new(|x, y| {
            let u = if x <= 1.25 && y <= 1.25 { 1.0 } else { 0.0 };
            let v = if y > 1.25 { 0.1 } else { 0.0 };
            [u, v]
        }),
        source: None,
        exact: None,
    }
}
