//! Refinement studies and snapshot output.
//!
//! A study runs one or more sweeps over `(h, τ_N)` pairs for a problem and
//! writes one CSV table per sweep. Configuration comes from command-line
//! values or from a TOML file:
//!
//! ```toml
//! [problem]
//! example = 1
//! m = 4
//! L = 6
//! grid = "uniform"
//!
//! [[sweep]]
//! name = "spatial"
//! h = "2^-2..2^-5"
//! tau = 2e-2
//!
//! [output]
//! dir = "out"
//! snapshots = [0, 0.5, 1]
//! resolution = 41
//! ```
//!
//! List values (`h`, `tau`, `snapshots`) may be a number, an array of
//! numbers, or a string accepted by [`parse_list`].

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{convergence_order, ErrorTracker};
use crate::basis::Coefficients;
use crate::error::{invalid, Error, Result};
use crate::model::{example_problem, ProblemSpec};
use crate::stepper::{run_with, Discretization, RunConfig};
use crate::timegrid::{build, choose_n_for_target, GridMode, Level};

use serde::Deserialize;

/// One table: every `(h, τ)` pair, `τ` outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
}

impl Sweep {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.tau
            .iter()
            .flat_map(|&t| self.h.iter().map(move |&h| (h, t)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub example: u32,
    pub degree: usize,
    pub gauss_points: usize,
    pub grid: GridMode,
    pub sweeps: Vec<Sweep>,
    pub out_dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub resolution: usize,
    /// Only consumed by randomized tests.
    pub seed: u64,
}

fn powers(scale: f64, from: i32, to: i32) -> Vec<f64> {
    let step = if to >= from { 1 } else { -1 };
    let mut out = Vec::new();
    let mut e = from;
    loop {
        out.push(scale * 2f64.powi(e));
        if e == to {
            return out;
        }
        e += step;
    }
}

impl StudyConfig {
    /// Sweeps and output defaults that reproduce the experiments for one
    /// example.
    pub fn for_example(example: u32) -> Result<Self> {
        let sweeps = match example {
            1 | 2 => vec![
                Sweep {
                    name: "spatial".into(),
                    h: powers(1.0, -2, -6),
                    tau: vec![2f64.powi(-6)],
                },
                Sweep {
                    name: "temporal".into(),
                    h: vec![2f64.powi(-4)],
                    tau: powers(1.0, -4, -8),
                },
            ],
            3 => vec![Sweep {
                name: "single".into(),
                h: vec![2.5 * 2f64.powi(-5)],
                tau: vec![2f64.powi(-6)],
            }],
            other => return Err(invalid(format!("unknown example {other}; expected 1, 2 or 3"))),
        };
        Ok(Self {
            example,
            degree: 4,
            gauss_points: 6,
            grid: GridMode::Uniform,
            sweeps,
            out_dir: PathBuf::from("out"),
            snapshots: if example == 3 { vec![0.0, 1.0] } else { Vec::new() },
            resolution: 41,
            seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps.is_empty() {
            return Err(invalid("no sweeps configured"));
        }
        for s in &self.sweeps {
            if s.h.is_empty() || s.tau.is_empty() {
                return Err(invalid(format!("sweep '{}' has an empty h or tau list", s.name)));
            }
            if let Some(bad) = s.h.iter().chain(&s.tau).find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(invalid(format!("sweep '{}' contains non-positive value {bad}", s.name)));
            }
        }
        if self.resolution == 0 {
            return Err(invalid("snapshot resolution must be positive"));
        }
        Ok(())
    }
}

/// Parses a comma-separated list of positive numbers. Items may be plain
/// numbers, powers `[c*]2^k`, or power ranges `[c*]2^a..2^b`.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || invalid(format!("cannot parse list item '{item}'"));
        let (scale, rest) = match item.split_once('*') {
            Some((c, r)) => (c.trim().parse::<f64>().map_err(|_| bad())?, r.trim()),
            None => (1.0, item),
        };
        let exponent = |s: &str| -> Result<i32> {
            s.trim()
                .strip_prefix("2^")
                .ok_or_else(bad)?
                .trim()
                .parse::<i32>()
                .map_err(|_| bad())
        };
        if let Some((a, b)) = rest.split_once("..") {
            out.extend(powers(scale, exponent(a)?, exponent(b)?));
        } else if rest.starts_with("2^") {
            out.push(scale * 2f64.powi(exponent(rest)?));
        } else {
            let v: f64 = rest.parse().map_err(|_| bad())?;
            out.push(scale * v);
        }
    }
    if out.is_empty() {
        return Err(invalid(format!("empty list '{text}'")));
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: ProblemSection,
    #[serde(default)]
    sweep: Vec<SweepSection>,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    example: u32,
    m: Option<usize>,
    #[serde(rename = "L")]
    gauss_points: Option<usize>,
    grid: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    name: Option<String>,
    h: ListSpec,
    tau: ListSpec,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    snapshots: Option<ListSpec>,
    resolution: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunSection {
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ListSpec {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

impl ListSpec {
    fn values(self, allow_zero: bool) -> Result<Vec<f64>> {
        match self {
            ListSpec::One(v) => Ok(vec![v]),
            ListSpec::Many(v) => Ok(v),
            ListSpec::Text(t) if allow_zero => parse_list_allow_zero(&t),
            ListSpec::Text(t) => parse_list(&t),
        }
    }
}

/// Reads a TOML configuration. Keys given override the example defaults;
/// any `[[sweep]]` table replaces the default sweeps.
pub fn parse_config(text: &str) -> Result<StudyConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = StudyConfig::for_example(file.problem.example)?;
    if let Some(m) = file.problem.m {
        cfg.degree = m;
    }
    if let Some(l) = file.problem.gauss_points {
        cfg.gauss_points = l;
    }
    if let Some(g) = file.problem.grid {
        cfg.grid = g.parse()?;
    }
    if !file.sweep.is_empty() {
        cfg.sweeps = file
            .sweep
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Sweep {
                    name: s.name.unwrap_or_else(|| format!("sweep{i}")),
                    h: s.h.values(false)?,
                    tau: s.tau.values(false)?,
                })
            })
            .collect::<Result<_>>()?;
    }
    if let Some(d) = file.output.dir {
        cfg.out_dir = d;
    }
    if let Some(s) = file.output.snapshots {
        cfg.snapshots = s.values(true)?;
    }
    if let Some(r) = file.output.resolution {
        cfg.resolution = r;
    }
    if let Some(seed) = file.run.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Comma-separated times; unlike [`parse_list`] zero is allowed.
pub fn parse_list_allow_zero(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| invalid(format!("cannot parse time '{s}'")))
        })
        .collect()
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    pub tau: f64,
    pub err: Option<[f64; 2]>,
    pub order: [Option<f64>; 2],
    pub wall_seconds: f64,
    pub status: String,
}

/// Written CSV files and whether every row succeeded.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub tables: Vec<(PathBuf, Vec<StudyRow>)>,
    pub snapshots: Vec<PathBuf>,
}

impl StudyOutcome {
    pub fn all_ok(&self) -> bool {
        self.tables
            .iter()
            .all(|(_, rows)| rows.iter().all(|r| r.status == "ok"))
    }
}

pub const CSV_HEADER: &str = "h,tau_N,err_u,CO_u,err_v,CO_v,wall_seconds,status";

fn num(v: f64) -> String {
    format!("{v:.9e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(&r).map_err(to_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Renders rows with the fixed numeric format; missing values are empty.
pub fn render_csv(rows: &[StudyRow]) -> String {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let records = rows.iter().map(|r| {
        let e = r.err.map(|e| [Some(e[0]), Some(e[1])]).unwrap_or([None, None]);
        vec![
            num(r.h),
            num(r.tau),
            opt(e[0]),
            opt(r.order[0]),
            opt(e[1]),
            opt(r.order[1]),
            num(r.wall_seconds),
            r.status.clone(),
        ]
    });
    csv_text(&CSV_HEADER.split(',').collect::<Vec<_>>(), records).expect("in-memory csv cannot fail")
}

/// Fills the order columns: each row is compared with the previous one when
/// exactly one of `h`, `τ` changed between them.
pub fn fill_orders(rows: &mut [StudyRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (rows[i - 1].clone(), &mut rows[i]);
        let one_changed = (prev.h == cur.h) != (prev.tau == cur.tau);
        cur.order = match (prev.err, cur.err, one_changed) {
            (Some(a), Some(b), true) => [0, 1].map(|k| convergence_order(a[k], b[k]).ok()),
            _ => [None, None],
        };
    }
}

/// Outcome of one solve: errors against the exact solution (when there is
/// one) and the states captured at the requested snapshot times.
pub struct Solve {
    pub disc: Discretization,
    pub err: Option<[f64; 2]>,
    pub wall_seconds: f64,
    pub captured: Vec<(f64, Coefficients)>,
}

/// Runs one `(h, τ)` pair, tracking errors and capturing states at
/// `snapshot_times` (linear interpolation between stored levels).
pub fn solve_pair(problem: &ProblemSpec, cfg: &StudyConfig, h: f64, tau: f64, snapshot_times: &[f64]) -> Result<Solve> {
    for &t in snapshot_times {
        if !(0.0..=problem.t_final).contains(&t) {
            return Err(invalid(format!(
                "snapshot time {t} lies outside [0, {}]",
                problem.t_final
            )));
        }
    }
    let disc = Discretization::new(problem, h, cfg.degree, cfg.gauss_points)?;
    let n = choose_n_for_target(cfg.grid, problem.t_final, tau)?;
    let times = build(cfg.grid, problem.t_final, n)?;
    let exact = problem.exact.clone();
    let reference = exact.as_ref().map(|e| move |x: f64, y: f64, t: f64| e(x, y, t));
    let mut tracker = reference
        .as_ref()
        .map(|r| ErrorTracker::new(&disc.basis, &disc.grid, r));
    let mut captured: Vec<(f64, Coefficients)> = Vec::new();
    let mut prev: Option<(Level, Coefficients)> = None;
    let out = run_with(problem, &disc, &times, &RunConfig::default(), |level, c| {
        if let Some(t) = tracker.as_mut() {
            t.observe(level, c);
        }
        for &ts in snapshot_times {
            let slack = 1e-12 * problem.t_final.max(1.0);
            if (level.time - ts).abs() <= slack {
                captured.push((ts, c.clone()));
            } else if let Some((pl, pc)) = prev.as_ref() {
                if pl.time + slack < ts && ts < level.time - slack {
                    let th = (ts - pl.time) / (level.time - pl.time);
                    captured.push((ts, Coefficients::combination(&[(1.0 - th, pc), (th, c)])));
                }
            }
        }
        if !snapshot_times.is_empty() {
            prev = Some((*level, c.clone()));
        }
        Ok(())
    })?;
    let err = tracker.map(|t| t.max);
    captured.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Solve {
        disc,
        err,
        wall_seconds: out.wall_seconds,
        captured,
    })
}

/// Uniform sampling lattice; a single point per axis sits at the centre.
pub fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Writes `x, y, u_h, v_h` (plus exact values and errors when known) on a
/// `resolution × resolution` lattice for each captured state.
pub fn dump_snapshots(
    problem: &ProblemSpec,
    solve: &Solve,
    resolution: usize,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    if resolution == 0 {
        return Err(invalid("snapshot resolution must be positive"));
    }
    fs::create_dir_all(dir)?;
    let d = problem.domain;
    let xs = lattice(d.x_min, d.x_max, resolution);
    let ys = lattice(d.y_min, d.y_max, resolution);
    let mut paths = Vec::new();
    for (t, c) in &solve.captured {
        let mut header = vec!["x", "y", "u_h", "v_h"];
        if problem.exact.is_some() {
            header.extend(["u_exact", "v_exact", "e_u", "e_v"]);
        }
        let mut records = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                let w = solve.disc.basis.evaluate(c, x, y)?.value;
                let mut r = vec![num(x), num(y), num(w[0]), num(w[1])];
                if let Some(e) = problem.exact.as_ref() {
                    let we = e(x, y, *t);
                    r.extend([num(we[0]), num(we[1]), num(w[0] - we[0]), num(w[1] - we[1])]);
                }
                records.push(r);
            }
        }
        let s = csv_text(&header, records)?;
        let path = dir.join(format!("{stem}_t={t:.6}.csv"));
        fs::write(&path, s)?;
        paths.push(path);
    }
    Ok(paths)
}

fn short(v: f64) -> String {
    let e = v.log2();
    if (e - e.round()).abs() < 1e-12 {
        format!("2^{}", e.round() as i64)
    } else {
        format!("{v:e}")
    }
}

/// Runs every sweep, writing one table per sweep into `cfg.out_dir`. Failed
/// rows are kept with their status and do not stop the sweep. Snapshots are
/// taken from the first row of the first sweep.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    let problem = example_problem(cfg.example)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut outcome = StudyOutcome {
        tables: Vec::new(),
        snapshots: Vec::new(),
    };
    for (si, sweep) in cfg.sweeps.iter().enumerate() {
        let mut rows = Vec::new();
        for (ri, (h, tau)) in sweep.pairs().into_iter().enumerate() {
            let snaps: &[f64] = if si == 0 && ri == 0 { &cfg.snapshots } else { &[] };
            let row = match solve_pair(&problem, cfg, h, tau, snaps) {
                Ok(solve) => {
                    if !snaps.is_empty() {
                        let stem = format!("example{}_h={}_tau={}", cfg.example, short(h), short(tau));
                        outcome.snapshots.extend(dump_snapshots(
                            &problem,
                            &solve,
                            cfg.resolution,
                            &cfg.out_dir,
                            &stem,
                        )?);
                    }
                    StudyRow {
                        h,
                        tau,
                        err: solve.err,
                        order: [None, None],
                        wall_seconds: solve.wall_seconds,
                        status: "ok".into(),
                    }
                }
                Err(e @ (Error::Io(_) | Error::InvalidArgument(_))) => return Err(e),
                Err(e) => StudyRow {
                    h,
                    tau,
                    err: None,
                    order: [None, None],
                    wall_seconds: 0.0,
                    status: e.to_string(),
                },
            };
            rows.push(row);
        }
        fill_orders(&mut rows);
        let path = cfg.out_dir.join(format!("example{}_{}.csv", cfg.example, sweep.name));
        fs::write(&path, render_csv(&rows))?;
        outcome.tables.push((path, rows));
    }
    Ok(outcome)
}
