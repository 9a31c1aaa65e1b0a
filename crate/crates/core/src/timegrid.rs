//! Time partitions with midpoints.
//!
//! Macro nodes `t_0 < … < t_N`, midpoints `t_{n+1/2} = (t_n + t_{n+1})/2`
//! and local steps `τ_n = τ_{n+1/2} = (t_{n+1} − t_n)/2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridMode {
    #[default]
    Uniform,
    /// `t_n = T(e^{n/N} − 1)/(e − 1)`
    Graded,
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridMode::Uniform => write!(f, "uniform"),
            GridMode::Graded => write!(f, "graded"),
        }
    }
}

impl FromStr for GridMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(GridMode::Uniform),
            "graded" => Ok(GridMode::Graded),
            other => Err(invalid(format!("unknown grid mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub mode: GridMode,
    pub nodes: Vec<f64>,
}

/// A time level: macro node `n` or the midpoint after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub index: usize,
    pub half: bool,
    pub time: f64,
}

impl TimeGrid {
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn midpoint(&self, n: usize) -> f64 {
        0.5 * (self.nodes[n] + self.nodes[n + 1])
    }

    /// Local step `τ_n`, `0 ≤ n < N`.
    pub fn tau(&self, n: usize) -> f64 {
        0.5 * (self.nodes[n + 1] - self.nodes[n])
    }

    pub fn max_tau(&self) -> f64 {
        (0..self.steps()).map(|n| self.tau(n)).fold(0.0, f64::max)
    }

    /// `Ĉ = max_s τ_s / τ_0`
    pub fn ratio_bound(&self) -> f64 {
        self.max_tau() / self.tau(0)
    }

    /// All levels in time order: `t_0, t_{1/2}, t_1, …, t_N`.
    pub fn levels(&self) -> Vec<Level> {
        let mut out = Vec::with_capacity(2 * self.steps() + 1);
        for n in 0..self.steps() {
            out.push(Level {
                index: n,
                half: false,
                time: self.nodes[n],
            });
            out.push(Level {
                index: n,
                half: true,
                time: self.midpoint(n),
            });
        }
        out.push(Level {
            index: self.steps(),
            half: false,
            time: self.t_final(),
        });
        out
    }

    /// Checks the structural invariants; graded grids also need the strict
    /// convexity and growth conditions.
    pub fn check(&self) -> Result<()> {
        let n = self.steps();
        if n == 0 {
            return Err(Error::Internal("time grid has no steps".into()));
        }
        if self.nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Internal("time nodes are not strictly increasing".into()));
        }
        let taus: Vec<f64> = (0..n).map(|i| self.tau(i)).collect();
        let slack = 1e-12 * self.t_final();
        if taus.windows(2).any(|w| w[1] < w[0] - slack) {
            return Err(Error::Internal("local steps decrease".into()));
        }
        if self.mode == GridMode::Graded {
            for i in 0..n.saturating_sub(1) {
                if !(self.nodes[i + 1] < 0.5 * (self.nodes[i] + self.nodes[i + 2])) {
                    return Err(Error::Internal(format!("midpoint inequality fails at node {}", i + 1)));
                }
                if !(taus[i + 1] > taus[i]) {
                    return Err(Error::Internal(format!("steps do not grow at {}", i + 1)));
                }
            }
        }
        Ok(())
    }
}

fn check_horizon(t_final: f64, n: usize, min_n: usize) -> Result<()> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(invalid(format!("final time must be positive, got {t_final}")));
    }
    if n < min_n {
        return Err(invalid(format!("need at least {min_n} macro steps, got {n}")));
    }
    Ok(())
}

pub fn build_graded(t_final: f64, n: usize) -> Result<TimeGrid> {
    check_horizon(t_final, n, 2)?;
    let e = std::f64::consts::E;
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| t_final * ((i as f64 / n as f64).exp() - 1.0) / (e - 1.0))
        .collect();
    nodes[0] = 0.0;
    nodes[n] = t_final;
    let grid = TimeGrid {
        mode: GridMode::Graded,
        nodes,
    };
    grid.check()?;
    Ok(grid)
}

pub fn build_uniform(t_final: f64, n: usize) -> Result<TimeGrid> {
    check_horizon(t_final, n, 1)?;
    let step = t_final / n as f64;
    let nodes = (0..=n)
        .map(|i| if i == n { t_final } else { step * i as f64 })
        .collect();
    let grid = TimeGrid {
        mode: GridMode::Uniform,
        nodes,
    };
    grid.check()?;
    Ok(grid)
}

pub fn build(mode: GridMode, t_final: f64, n: usize) -> Result<TimeGrid> {
    match mode {
        GridMode::Uniform => build_uniform(t_final, n),
        GridMode::Graded => build_graded(t_final, n),
    }
}

/// Largest local step of the graded grid with `n` macro steps.
fn graded_max_tau(t_final: f64, n: usize) -> f64 {
    let e = std::f64::consts::E;
    let prev = ((n as f64 - 1.0) / n as f64).exp();
    0.5 * t_final * (e - prev) / (e - 1.0)
}

/// Smallest macro step count whose largest local step is at most
/// `tau_target`.
pub fn choose_n_for_target(mode: GridMode, t_final: f64, tau_target: f64) -> Result<usize> {
    if !(tau_target > 0.0) || !(tau_target < 0.5 * t_final) {
        return Err(invalid(format!(
            "target step must lie in (0, T/2) = (0, {}), got {tau_target}",
            0.5 * t_final
        )));
    }
    let slack = 1.0 + 1e-12;
    let uniform = ((t_final / (2.0 * tau_target)) / slack).ceil() as usize;
    match mode {
        GridMode::Uniform => Ok(uniform.max(1)),
        GridMode::Graded => {
            let mut n = uniform.max(2);
            while graded_max_tau(t_final, n) > tau_target * slack {
                n += 1;
            }
            Ok(n)
        }
    }
}
