//! Rectangular partitions, Gauss–Legendre rules and collocation point sets.
//!
//! The collocation grid is a tensor product: every element carries
//! `L × L` Gauss points, and the per-axis composite rules are kept alongside
//! the flat point list so that tensor-structured kernels can work on
//! `(npx × npy)` matrices directly. Flat point index is `px + npx * py`.

use crate::error::{invalid, Result};

/// Relative tolerance used when deciding whether a point sits on the domain.
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(invalid(format!(
                "degenerate domain ({x_min}, {x_max}) x ({y_min}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The square `(a, b)²`.
    pub fn square(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, a, b)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)]
    }

    /// Closed-domain membership with a small relative slack.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let tx = DOMAIN_TOL * self.width().max(1.0);
        let ty = DOMAIN_TOL * self.height().max(1.0);
        x >= self.x_min - tx && x <= self.x_max + tx && y >= self.y_min - ty && y <= self.y_max + ty
    }
}

/// Side of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }
}

/// Axis-aligned rectangular element `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub ix: usize,
    pub iy: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Element {
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    /// Endpoints of one side, ordered counter-clockwise.
    pub fn side_segment(&self, side: Side) -> ([f64; 2], [f64; 2]) {
        match side {
            Side::Bottom => ([self.x0, self.y0], [self.x1, self.y0]),
            Side::Right => ([self.x1, self.y0], [self.x1, self.y1]),
            Side::Top => ([self.x1, self.y1], [self.x0, self.y1]),
            Side::Left => ([self.x0, self.y1], [self.x0, self.y0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub element: usize,
    pub side: Side,
    pub normal: [f64; 2],
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl BoundaryEdge {
    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
}

/// Uniform tensor-product partition of a rectangular domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    /// Mesh lines `x_0 < … < x_nx`.
    pub x_lines: Vec<f64>,
    pub y_lines: Vec<f64>,
    /// Element `ix + nx * iy`.
    pub elements: Vec<Element>,
    /// Largest element diagonal.
    pub h: f64,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn element_index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    /// Uniform mesh with explicit cell counts per axis.
    pub fn uniform(domain: Domain, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid("mesh needs at least one element per axis"));
        }
        let x_lines = lines(domain.x_min, domain.x_max, nx);
        let y_lines = lines(domain.y_min, domain.y_max, ny);
        let mut elements = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                elements.push(Element {
                    ix,
                    iy,
                    x0: x_lines[ix],
                    x1: x_lines[ix + 1],
                    y0: y_lines[iy],
                    y1: y_lines[iy + 1],
                });
            }
        }
        let h = elements.iter().map(Element::diameter).fold(0.0, f64::max);

        let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
        let mut push = |element: usize, side: Side| {
            let (start, end) = elements[element].side_segment(side);
            boundary_edges.push(BoundaryEdge {
                element,
                side,
                normal: side.normal(),
                start,
                end,
            });
        };
        for ix in 0..nx {
            push(ix, Side::Bottom);
            push(ix + nx * (ny - 1), Side::Top);
        }
        for iy in 0..ny {
            push(nx * iy, Side::Left);
            push(nx - 1 + nx * iy, Side::Right);
        }

        Ok(Self {
            domain,
            nx,
            ny,
            x_lines,
            y_lines,
            elements,
            h,
            boundary_edges,
        })
    }
}

fn lines(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / n as f64;
    (0..=n).map(|i| if i == n { b } else { a + step * i as f64 }).collect()
}

/// Cells per axis so that every cell side is at most `h_target`.
fn cells_for(side: f64, h_target: f64) -> usize {
    // slack absorbs representation error in ratios like π / (π/4)
    ((side / h_target) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Uniform `n×n`-style partition with `n = ceil(side / h_target)` per axis.
pub fn build_mesh(domain: Domain, h_target: f64) -> Result<Mesh> {
    if !(h_target > 0.0) || !h_target.is_finite() {
        return Err(invalid(format!("h_target must be positive, got {h_target}")));
    }
    let nx = cells_for(domain.width(), h_target);
    let ny = cells_for(domain.height(), h_target);
    Mesh::uniform(domain, nx, ny)
}

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (a + t * len, w * len))
    }
}

pub const MAX_GAUSS_POINTS: usize = 16;

/// `L`-point Gauss–Legendre rule on `[0, 1]`, `1 ≤ L ≤ 16`.
pub fn gauss_rule(points: usize) -> Result<GaussRule> {
    if points == 0 || points > MAX_GAUSS_POINTS {
        return Err(invalid(format!(
            "Gauss rule size must be in 1..={MAX_GAUSS_POINTS}, got {points}"
        )));
    }
    let n = points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Ok(GaussRule { nodes, weights })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite 1D rule along one axis: `L` Gauss points in each cell.
#[derive(Debug, Clone)]
pub struct AxisPoints {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Owning cell of each node.
    pub cell: Vec<usize>,
    /// Mesh lines of this axis.
    pub lines: Vec<f64>,
}

impl AxisPoints {
    fn new(lines: &[f64], rule: &GaussRule) -> Self {
        let cells = lines.len() - 1;
        let mut nodes = Vec::with_capacity(cells * rule.len());
        let mut weights = Vec::with_capacity(cells * rule.len());
        let mut cell = Vec::with_capacity(cells * rule.len());
        for c in 0..cells {
            for (x, w) in rule.mapped(lines[c], lines[c + 1]) {
                nodes.push(x);
                weights.push(w);
                cell.push(c);
            }
        }
        Self {
            nodes,
            weights,
            cell,
            lines: lines.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub element: usize,
}

/// Quadrature point on an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Edge shared by two elements. `normal` points from `minus` into `plus`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorFace {
    pub minus: usize,
    pub plus: usize,
    pub normal: [f64; 2],
    pub points: Vec<EdgePoint>,
}

impl InteriorFace {
    pub fn length(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub normal: [f64; 2],
    pub element: usize,
}

#[derive(Debug, Clone)]
pub struct CollocationGrid {
    pub domain: Domain,
    pub rule: GaussRule,
    pub x_axis: AxisPoints,
    pub y_axis: AxisPoints,
    /// Flat point list, index `px + npx * py`.
    pub points: Vec<CollocationPoint>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_points: Vec<BoundaryPoint>,
}

impl CollocationGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x_axis.len(), self.y_axis.len())
    }

    /// Quadrature of a scalar function over the domain.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().map(|p| p.weight * f(p.x, p.y)).sum()
    }

    /// Sum of composite weights per element.
    pub fn element_weight_sums(&self, elements: usize) -> Vec<f64> {
        let mut sums = vec![0.0; elements];
        for p in &self.points {
            sums[p.element] += p.weight;
        }
        sums
    }
}

pub fn build_collocation(mesh: &Mesh, rule: &GaussRule) -> CollocationGrid {
    let x_axis = AxisPoints::new(&mesh.x_lines, rule);
    let y_axis = AxisPoints::new(&mesh.y_lines, rule);

    let mut points = Vec::with_capacity(x_axis.len() * y_axis.len());
    for py in 0..y_axis.len() {
        for px in 0..x_axis.len() {
            points.push(CollocationPoint {
                x: x_axis.nodes[px],
                y: y_axis.nodes[py],
                weight: x_axis.weights[px] * y_axis.weights[py],
                element: mesh.element_index(x_axis.cell[px], y_axis.cell[py]),
            });
        }
    }

    let edge_points = |start: [f64; 2], end: [f64; 2]| -> Vec<EdgePoint> {
        let len = (end[0] - start[0]).hypot(end[1] - start[1]);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| EdgePoint {
                x: start[0] + t * (end[0] - start[0]),
                y: start[1] + t * (end[1] - start[1]),
                weight: w * len,
            })
            .collect()
    };

    let mut interior_faces = Vec::new();
    for iy in 0..mesh.ny {
        for ix in 0..mesh.nx {
            let e = mesh.element_index(ix, iy);
            let el = &mesh.elements[e];
            if ix + 1 < mesh.nx {
                interior_faces.push(InteriorFace {
                    minus: e,
                    plus: mesh.element_index(ix + 1, iy),
                    normal: [1.0, 0.0],
                    points: edge_points([el.x1, el.y0], [el.x1, el.y1]),
                });
            }
            if iy + 1 < mesh.ny {
                interior_faces.push(InteriorFace {
                    minus: e,
                    plus: mesh.element_index(ix, iy + 1),
                    normal: [0.0, 1.0],
                    points: edge_points([el.x0, el.y1], [el.x1, el.y1]),
                });
            }
        }
    }

    let mut boundary_points = Vec::with_capacity(mesh.boundary_edges.len() * rule.len());
    for edge in &mesh.boundary_edges {
        for p in edge_points(edge.start, edge.end) {
            boundary_points.push(BoundaryPoint {
                x: p.x,
                y: p.y,
                weight: p.weight,
                normal: edge.normal,
                element: edge.element,
            });
        }
    }

    CollocationGrid {
        domain: mesh.domain,
        rule: rule.clone(),
        x_axis,
        y_axis,
        points,
        interior_faces,
        boundary_points,
    }
}
