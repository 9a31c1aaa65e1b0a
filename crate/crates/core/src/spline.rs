//! Univariate C¹ B-spline bases of degree `m` on a set of mesh lines.
//!
//! Clamped knot vector with end multiplicity `m + 1` and interior multiplicity
//! `m − 1`, which gives exactly C¹ continuity across every interior line and a
//! space of dimension `(m + 1) + (n − 1)(m − 1)` for `n` cells.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Which one-sided limit to take when a point sits on a mesh line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    FromLeft,
    FromRight,
}

/// Values, first and second derivatives of the `m + 1` functions that are
/// nonzero on one cell; function `first + j` has entry `j`.
#[derive(Debug, Clone)]
pub struct LocalEval {
    pub first: usize,
    pub ders: [Vec<f64>; 3],
}

#[derive(Debug, Clone)]
pub struct AxisSpline {
    degree: usize,
    lines: Vec<f64>,
    knots: Vec<f64>,
}

impl AxisSpline {
    pub fn new(lines: &[f64], degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(invalid("C¹ splines need degree ≥ 2"));
        }
        if lines.len() < 2 || lines.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("mesh lines must be strictly increasing"));
        }
        let mut knots = Vec::new();
        let n = lines.len() - 1;
        knots.extend(std::iter::repeat(lines[0]).take(degree + 1));
        for &x in &lines[1..n] {
            knots.extend(std::iter::repeat(x).take(degree - 1));
        }
        knots.extend(std::iter::repeat(lines[n]).take(degree + 1));
        Ok(Self {
            degree,
            lines: lines.to_vec(),
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cells(&self) -> usize {
        self.lines.len() - 1
    }

    pub fn lines(&self) -> &[f64] {
        &self.lines
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn start(&self) -> f64 {
        self.lines[0]
    }

    pub fn end(&self) -> f64 {
        *self.lines.last().unwrap()
    }

    /// Cell containing `x`; on a mesh line the side is picked by `limit`.
    pub fn cell_of(&self, x: f64, limit: Limit) -> usize {
        let n = self.cells();
        // index of the first line strictly greater than x
        let upper = self.lines.partition_point(|&l| l <= x);
        let on_line = upper > 0 && self.lines[upper - 1] == x;
        let cell = if on_line {
            let k = upper - 1;
            match limit {
                Limit::FromLeft if k > 0 => k - 1,
                Limit::FromLeft => 0,
                Limit::FromRight => k,
            }
        } else {
            upper.saturating_sub(1)
        };
        cell.min(n - 1)
    }

    fn span_of_cell(&self, cell: usize) -> usize {
        self.degree + cell * (self.degree - 1)
    }

    /// Local evaluation on a given cell (extrapolates the cell polynomial).
    pub fn eval_on_cell(&self, x: f64, cell: usize) -> LocalEval {
        let p = self.degree;
        let span = self.span_of_cell(cell);
        let u = &self.knots;

        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        const ORDERS: usize = 2;
        let mut ders = [vec![0.0; p + 1], vec![0.0; p + 1], vec![0.0; p + 1]];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=ORDERS {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if rk >= 0 {
                    let rk = rk as usize;
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().skip(1) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        LocalEval { first: span - p, ders }
    }

    pub fn eval(&self, x: f64, limit: Limit) -> LocalEval {
        self.eval_on_cell(x, self.cell_of(x, limit))
    }

    /// Dense `(points × dim)` tables of derivative `order` (0, 1 or 2).
    pub fn table(&self, xs: &[f64], limit: Limit, order: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(xs.len(), self.dim());
        for (i, &x) in xs.iter().enumerate() {
            let e = self.eval(x, limit);
            for (j, v) in e.ders[order].iter().enumerate() {
                t[(i, e.first + j)] = *v;
            }
        }
        t
    }
}
