//! Error norms, convergence orders and the stability functional.

use crate::basis::{BasisSet, Coefficients, GridField};
use crate::error::{invalid, Error, Result};
use crate::mesh::CollocationGrid;
use crate::stepper::Trajectory;
use crate::timegrid::{Level, TimeGrid};

/// Space-time reference solution `(x, y, t) ↦ (u, v)`.
pub type Reference<'a> = &'a (dyn Fn(f64, f64, f64) -> [f64; 2] + Sync);

/// Per-component errors in `L∞(0,T; discrete L²)` for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub tau: f64,
    pub err: [f64; 2],
    pub order: Option<[f64; 2]>,
    pub wall_seconds: f64,
}

/// Pointwise error `w_h − w` on the collocation grid at time `t`.
pub fn error_field(
    basis: &BasisSet,
    grid: &CollocationGrid,
    c: &Coefficients,
    reference: Reference<'_>,
    t: f64,
) -> GridField {
    let mut f = basis.evaluate_grid(c);
    for (q, &y) in grid.y_axis.nodes.iter().enumerate() {
        for (p, &x) in grid.x_axis.nodes.iter().enumerate() {
            let e = reference(x, y, t);
            f.blocks[0][(p, q)] -= e[0];
            f.blocks[1][(p, q)] -= e[1];
        }
    }
    f
}

/// Per-component discrete norms of a grid field.
pub fn grid_norms(grid: &CollocationGrid, f: &GridField) -> [f64; 2] {
    [0, 1].map(|k| {
        let b = &f.blocks[k];
        let mut s = 0.0;
        for (q, wy) in grid.y_axis.weights.iter().enumerate() {
            for (p, wx) in grid.x_axis.weights.iter().enumerate() {
                s += wx * wy * b[(p, q)] * b[(p, q)];
            }
        }
        s.sqrt()
    })
}

/// Running maximum of per-level errors, usable as a run observer.
#[derive(Clone)]
pub struct ErrorTracker<'a> {
    basis: &'a BasisSet,
    grid: &'a CollocationGrid,
    reference: Reference<'a>,
    pub max: [f64; 2],
    pub levels: usize,
}

impl<'a> ErrorTracker<'a> {
    pub fn new(basis: &'a BasisSet, grid: &'a CollocationGrid, reference: Reference<'a>) -> Self {
        Self {
            basis,
            grid,
            reference,
            max: [0.0; 2],
            levels: 0,
        }
    }

    pub fn observe(&mut self, level: &Level, c: &Coefficients) -> [f64; 2] {
        let e = grid_norms(
            self.grid,
            &error_field(self.basis, self.grid, c, self.reference, level.time),
        );
        for k in 0..2 {
            // NaN propagates so a blown-up level is never hidden
            self.max[k] = if e[k].is_nan() { f64::NAN } else { self.max[k].max(e[k]) };
        }
        self.levels += 1;
        e
    }
}

/// `max_n ‖w_h^n − w^n‖_·` per component over every stored level.
pub fn error_linf_l2(
    trajectory: &Trajectory,
    exact: Option<Reference<'_>>,
    basis: &BasisSet,
    grid: &CollocationGrid,
) -> Result<[f64; 2]> {
    let exact = exact.ok_or_else(|| invalid("error norms need an exact solution"))?;
    let mut tracker = ErrorTracker::new(basis, grid, exact);
    for (l, c) in trajectory.levels.iter().zip(&trajectory.states) {
        tracker.observe(l, c);
    }
    Ok(tracker.max)
}

/// `log₂(coarse / fine)`
pub fn convergence_order(coarse: f64, fine: f64) -> Result<f64> {
    if !(coarse > 0.0) || !(fine > 0.0) || !coarse.is_finite() || !fine.is_finite() {
        return Err(Error::UndefinedOrder { coarse, fine });
    }
    Ok((coarse / fine).log2())
}

/// Left side of the stability estimate for `n = 0, …, N − 1`:
/// `‖e^{n+1}‖² + ‖e^{n+1/2}‖² + ‖e^n‖²
///  + 2 Σ_{s=1}^{n−1} (τ_s² − τ_{s−1}²)/τ_{n−1}² ‖e^{s+1/2} − e^s‖²`,
/// accumulated level by level so that long runs need not be stored.
pub struct StabilityFunctional<'a> {
    basis: &'a BasisSet,
    grid: &'a CollocationGrid,
    reference: Reference<'a>,
    times: &'a TimeGrid,
    macro_sq: Vec<f64>,
    half_sq: Vec<f64>,
    last_macro: Option<GridField>,
    /// `Σ_{s=1}^{n−1} (τ_s² − τ_{s−1}²) ‖e^{s+1/2} − e^s‖²` for the latest `n`.
    weighted: Vec<f64>,
    pub values: Vec<f64>,
}

impl<'a> StabilityFunctional<'a> {
    pub fn new(basis: &'a BasisSet, grid: &'a CollocationGrid, reference: Reference<'a>, times: &'a TimeGrid) -> Self {
        Self {
            basis,
            grid,
            reference,
            times,
            macro_sq: Vec::new(),
            half_sq: Vec::new(),
            last_macro: None,
            weighted: vec![0.0],
            values: Vec::new(),
        }
    }

    fn sq(&self, f: &GridField) -> f64 {
        grid_norms(self.grid, f).iter().map(|v| v * v).sum()
    }

    /// Levels must arrive in time order, starting at `t_0`.
    pub fn observe(&mut self, level: &Level, c: &Coefficients) -> Result<()> {
        let e = error_field(self.basis, self.grid, c, self.reference, level.time);
        let n = level.index;
        if level.half {
            let prev = self
                .last_macro
                .as_ref()
                .filter(|_| self.macro_sq.len() == n + 1 && self.half_sq.len() == n)
                .ok_or_else(|| invalid("levels must be observed in time order"))?;
            let inc = GridField {
                blocks: [0, 1].map(|k| &e.blocks[k] - &prev.blocks[k]),
            };
            let inc = self.sq(&inc);
            self.half_sq.push(self.sq(&e));
            // weighted[n] covers s = 1..n−1; extend it with s = n for the next value
            let w = if n >= 1 {
                self.times.tau(n).powi(2) - self.times.tau(n - 1).powi(2)
            } else {
                0.0
            };
            let last = *self.weighted.last().unwrap();
            self.weighted.push(last + w * inc);
        } else {
            if self.macro_sq.len() != n || self.half_sq.len() != n {
                return Err(invalid("levels must be observed in time order"));
            }
            self.macro_sq.push(self.sq(&e));
            self.last_macro = Some(e);
            if n >= 1 {
                let m = n - 1;
                let mut v = self.macro_sq[m + 1] + self.half_sq[m] + self.macro_sq[m];
                if m >= 2 {
                    v += 2.0 * self.weighted[m] / self.times.tau(m - 1).powi(2);
                }
                self.values.push(v);
            }
        }
        Ok(())
    }
}

/// [`StabilityFunctional`] over a stored trajectory.
pub fn stability_functional(
    trajectory: &Trajectory,
    reference: Reference<'_>,
    times: &TimeGrid,
    basis: &BasisSet,
    grid: &CollocationGrid,
) -> Result<Vec<f64>> {
    if trajectory.states.len() != 2 * times.steps() + 1 {
        return Err(invalid("trajectory does not cover every level of the time grid"));
    }
    let mut acc = StabilityFunctional::new(basis, grid, reference, times);
    for (l, c) in trajectory.levels.iter().zip(&trajectory.states) {
        acc.observe(l, c)?;
    }
    Ok(acc.values)
}

/// Least-squares slope of `values` against their index.
pub fn trend_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    sxy / sxx
}
