//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::time::Instant;

use fhn_osc::analysis::{convergence_order, grid_norms, ErrorTracker};
use fhn_osc::basis::{GridField, Trace};
use fhn_osc::model::{example_problem, FhnParams, ProblemSpec};
use fhn_osc::operators::assemble_operators;
use fhn_osc::oracle::{oracle_solve, oracle_solve_with, OracleOptions};
use fhn_osc::stepper::{critical_step, run_with, Discretization, RunConfig};
use fhn_osc::study::{solve_pair, StudyConfig};
use fhn_osc::timegrid::{build_uniform, choose_n_for_target, GridMode};

struct Verdict {
    pass: bool,
    summary: String,
}

fn errors(problem: &ProblemSpec, pairs: &[(f64, f64)]) -> Vec<Result<[f64; 2], String>> {
    let cfg = StudyConfig::for_example(1).unwrap();
    pairs
        .iter()
        .map(|&(h, tau)| match solve_pair(problem, &cfg, h, tau, &[]) {
            Ok(s) => Ok(s.err.expect("exact solution")),
            Err(e) => Err(e.to_string()),
        })
        .collect()
}

fn ladder(
    problem: &ProblemSpec,
    pairs: &[(f64, f64)],
    band: (f64, f64),
    label: &str,
) -> (bool, Vec<Option<[f64; 2]>>, String) {
    let errs = errors(problem, pairs);
    let mut ok = true;
    let mut lines = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    for (&(h, tau), e) in pairs.iter().zip(&errs) {
        match e {
            Ok(e) => {
                let co = prev.map(|p| [0, 1].map(|k| convergence_order(p[k], e[k]).unwrap_or(f64::NAN)));
                if let Some(co) = co {
                    ok &= co.iter().all(|c| (band.0..=band.1).contains(c));
                }
                let co_text = co.map(|c| format!(" CO {:.4}/{:.4}", c[0], c[1])).unwrap_or_default();
                lines.push(format!(
                    "h={h:.4e} tau={tau:.4e} err {:.4e}/{:.4e}{co_text}",
                    e[0], e[1]
                ));
                prev = Some(*e);
            }
            Err(msg) => {
                ok = false;
                lines.push(format!("h={h:.4e} tau={tau:.4e} failed: {msg}"));
                prev = None;
            }
        }
    }
    for l in &lines {
        println!("    {label}: {l}");
    }
    let errs = errs.into_iter().map(|e| e.ok()).collect();
    (
        ok,
        errs,
        format!("{} rows, CO band [{}, {}]", pairs.len(), band.0, band.1),
    )
}

fn powers(from: i32, to: i32) -> Vec<f64> {
    (to..=from).rev().map(|e| 2f64.powi(e)).collect()
}

fn temporal_pairs() -> Vec<(f64, f64)> {
    powers(-4, -7).into_iter().map(|t| (2f64.powi(-4), t)).collect()
}

fn spatial_pairs() -> Vec<(f64, f64)> {
    powers(-2, -5).into_iter().map(|h| (h, 2f64.powi(-6))).collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (ok, _, s) = ladder(
        &example_problem(1).unwrap(),
        &temporal_pairs(),
        (1.7, 2.4),
        "ex1 temporal",
    );
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: ok && secs <= 600.0,
        summary: format!("Example 1 temporal ladder, {s}, {secs:.1}s (limit 600s)"),
    }
}

fn criterion_2() -> Verdict {
    // reference spatial ladder, rows h = 2^-2 … 2^-5
    let table = [
        [1.3570e-3, 1.4291e-3],
        [7.7876e-5, 8.2076e-5],
        [4.4621e-6, 4.7259e-6],
        [2.4265e-7, 2.5520e-7],
    ];
    let start = Instant::now();
    let (ok, errs, s) = ladder(
        &example_problem(1).unwrap(),
        &spatial_pairs(),
        (3.5, 4.6),
        "ex1 spatial",
    );
    let secs = start.elapsed().as_secs_f64();
    let mut magnitude_ok = true;
    for (e, t) in errs.iter().zip(&table) {
        let within = e
            .map(|e| (0..2).all(|k| e[k] <= 20.0 * t[k] && e[k] >= t[k] / 20.0))
            .unwrap_or(false);
        magnitude_ok &= within;
    }
    Verdict {
        pass: ok && magnitude_ok && secs <= 1200.0,
        summary: format!(
            "Example 1 spatial ladder, {s}, magnitudes within 20x of the reference values: {magnitude_ok}, {secs:.1}s (limit 1200s)"
        ),
    }
}

fn criterion_3() -> Verdict {
    let problem = example_problem(2).unwrap();
    let start = Instant::now();
    let (t_ok, _, _) = ladder(&problem, &temporal_pairs(), (1.7, 2.5), "ex2 temporal");
    let t_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let (s_ok, _, _) = ladder(&problem, &spatial_pairs(), (3.5, 4.6), "ex2 spatial");
    let s_secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: t_ok && s_ok && t_secs <= 600.0 && s_secs <= 1200.0,
        summary: format!(
            "Example 2 temporal ladder in [1.7, 2.5]: {t_ok} ({t_secs:.1}s), spatial ladder in [3.5, 4.6]: {s_ok} ({s_secs:.1}s)"
        ),
    }
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    // accuracy of the reference solver on the closed-form examples
    let mut validated = 0.0f64;
    for id in [1, 2] {
        let sol = oracle_solve(&example_problem(id).unwrap(), 128, 512).unwrap();
        let rel = sol.validation.unwrap().relative();
        println!("    oracle self-validation, example {id} (128 cells, 512 steps): {rel:.4e}");
        validated = validated.max(rel);
    }

    let problem = example_problem(3).unwrap();
    let disc = Discretization::new(&problem, 2.5 * 2f64.powi(-5), 4, 6).unwrap();
    let n = choose_n_for_target(GridMode::Uniform, problem.t_final, 2f64.powi(-6)).unwrap();
    let times = build_uniform(problem.t_final, n).unwrap();
    let mut norms = Vec::new();
    let mut last = None;
    let run = run_with(&problem, &disc, &times, &RunConfig::default(), |_, c| {
        norms.push(c.norm());
        last = Some(c.clone());
        Ok(())
    });
    let finite = run.is_ok() && norms.iter().all(|v| v.is_finite());
    let ratio = norms.iter().cloned().fold(0.0, f64::max) / norms[0];

    let reference = oracle_solve_with(&problem, 256, 256, 1024, OracleOptions { store_every: 1024 }).unwrap();
    let (agreement, bound) = match last.as_ref() {
        Some(c) if finite => {
            let wh = disc.basis.evaluate_grid(c);
            let fd = GridField::sample(&disc.grid, |x, y| reference.sample(x, y, problem.t_final));
            let diff = GridField {
                blocks: [0, 1].map(|k| &wh.blocks[k] - &fd.blocks[k]),
            };
            let e = grid_norms(&disc.grid, &diff);
            let size = reference
                .final_snapshot()
                .fields
                .iter()
                .map(|f| f.amax())
                .fold(0.0, f64::max);
            let rel = e[0].max(e[1]) / (problem.domain.area().sqrt() * size);
            (rel, 3.0 * validated)
        }
        _ => (f64::INFINITY, 3.0 * validated),
    };
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: finite && ratio <= 10.0 && agreement <= bound && secs <= 300.0,
        summary: format!(
            "Example 3: finite {finite}, max norm / initial {ratio:.4}, oracle difference {agreement:.4e} (bound {bound:.4e}), {secs:.1}s (limit 300s)"
        ),
    }
}

fn criterion_5() -> Verdict {
    let problem = common::linear_in_time_problem([1.0, 0.5], 0.1);
    let disc = Discretization::new(&problem, 0.25, 4, 6).unwrap();
    let ops = assemble_operators(&disc.basis, &problem.params);
    // a step inside the linear stability region
    let tau = 0.5 * critical_step(&ops);
    let n = choose_n_for_target(GridMode::Uniform, problem.t_final, tau).unwrap();
    let times = build_uniform(problem.t_final, n).unwrap();
    let exact = problem.exact.clone().unwrap();
    let reference = move |x: f64, y: f64, t: f64| exact(x, y, t);
    let mut tracker = ErrorTracker::new(&disc.basis, &disc.grid, &reference);
    let ok = run_with(&problem, &disc, &times, &RunConfig::default(), |l, c| {
        tracker.observe(l, c);
        Ok(())
    })
    .is_ok();
    let err = tracker.max[0].max(tracker.max[1]);
    Verdict {
        pass: ok && err <= 1e-8,
        summary: format!("linear-in-time polynomial solution, h=0.25, {n} steps: max error {err:.3e} (limit 1e-8)"),
    }
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut rng = common::rng(6);
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    let both = [Trace::Zero, Trace::Free];
    let s = common::setup(common::unit_square(), 3, 4, 4, 6, both);
    let s5 = common::setup(
        fhn_osc::mesh::Domain::new(-1.0, 0.5, 0.0, 2.0).unwrap(),
        4,
        3,
        5,
        7,
        [Trace::Free; 2],
    );
    checks.push((
        "orthonormality",
        common::orthonormality_defect(&s.basis, &s.grid).max(common::orthonormality_defect(&s5.basis, &s5.grid)),
        1e-10,
    ));
    let f = |x: f64, y: f64| [(3.0 * x).sin() * y.exp(), x * x - y.cos()];
    checks.push((
        "projection idempotence",
        common::projection_idempotence(&s.basis, &s.grid, f)
            .max(common::projection_idempotence(&s5.basis, &s5.grid, f)),
        1e-12,
    ));
    let quad = (1..=8).map(|l| common::quadrature_defect(l, 3, 2)).fold(0.0, f64::max);
    checks.push(("quadrature exactness", quad, 1e-12));
    let jump = (0..20)
        .map(|_| common::jump_defect(&s, [1.0, 0.3], &mut rng).max(common::jump_defect(&s5, [0.2, 2.0], &mut rng)))
        .fold(0.0, f64::max);
    checks.push(("jump form on the conforming space", jump, 1e-9));
    let (ratio, cf) = common::lipschitz_check(&FhnParams::default(), 1.0, 10_000, &mut rng);
    checks.push(("Lipschitz ratio / C_F", ratio / cf, 1.0));
    let ibp = (0..20)
        .map(|_| common::ibp_defect(&s, &mut rng).max(common::ibp_defect(&s5, &mut rng)))
        .fold(0.0, f64::max);
    checks.push(("integration by parts", ibp, 1e-8));
    let params = FhnParams {
        gamma: [0.7, 1.3],
        beta: [0.5, 0.0],
        ..FhnParams::default()
    };
    let (so, ops) = common::small_operators([Trace::Free, Trace::Zero], &params);
    let sup = [1e-3, 0.1, 2.0, 50.0]
        .iter()
        .map(|&a| common::superposition_defect(&ops, &so.basis, a, &mut rng))
        .fold(0.0, f64::max);
    checks.push(("superposition of the linear solve", sup, 1e-10));

    let mut ok = true;
    for (name, value, limit) in &checks {
        let pass = value <= limit;
        ok &= pass;
        println!(
            "    {name}: {value:.3e} (limit {limit:.0e}) {}",
            if pass { "ok" } else { "exceeded" }
        );
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: ok && secs < 120.0,
        summary: format!("{} property checks, {secs:.1}s (limit 120s)", checks.len()),
    }
}

fn criterion_7() -> Verdict {
    // (errors of one column, printed orders of the rows after the first)
    let columns: [(&str, [f64; 5], [f64; 4]); 8] = [
        (
            "ex1 h u",
            [1.3570e-3, 7.7876e-5, 4.4621e-6, 2.4265e-7, 1.2825e-8],
            [4.1231, 4.1254, 4.2008, 4.2419],
        ),
        (
            "ex1 h v",
            [1.4291e-3, 8.2076e-5, 4.7259e-6, 2.5520e-7, 1.3500e-8],
            [4.1220, 4.1183, 4.2109, 4.2406],
        ),
        (
            "ex1 tau u",
            [2.8871e-3, 7.2629e-4, 1.7998e-4, 4.3856e-5, 1.0012e-5],
            [1.9910, 2.0127, 2.0370, 2.1310],
        ),
        (
            "ex1 tau v",
            [3.0089e-3, 7.5814e-4, 1.8908e-4, 4.6908e-5, 1.0860e-5],
            [1.9887, 2.0035, 2.0111, 2.1108],
        ),
        (
            "ex2 h u",
            [6.6520e-4, 4.1196e-5, 2.4008e-6, 1.4997e-7, 8.5323e-9],
            [4.0132, 4.1009, 4.0008, 4.1356],
        ),
        (
            "ex2 h v",
            [7.2415e-4, 4.5344e-5, 2.5144e-6, 1.4664e-7, 8.0793e-9],
            [3.9973, 4.1726, 4.0999, 4.1819],
        ),
        (
            "ex2 tau u",
            [4.2187e-3, 1.0566e-3, 2.6406e-4, 5.8844e-5, 1.2380e-5],
            [1.9974, 2.0005, 2.1659, 2.2489],
        ),
        (
            "ex2 tau v",
            [2.5403e-3, 6.3464e-4, 1.5465e-4, 3.3960e-5, 7.0439e-6],
            [2.0010, 2.0369, 2.1871, 2.2694],
        ),
    ];
    let mut total = 0;
    let mut mismatches = Vec::new();
    for (name, errs, orders) in &columns {
        for i in 0..4 {
            total += 1;
            let co = convergence_order(errs[i], errs[i + 1]).unwrap();
            if format!("{co:.4}") != format!("{:.4}", orders[i]) {
                mismatches.push(format!("{name} row {}: {co:.6} vs {:.4}", i + 2, orders[i]));
            }
        }
    }
    for m in &mismatches {
        println!("    {m}");
    }
    Verdict {
        pass: mismatches.is_empty(),
        summary: format!(
            "{} of {total} printed orders reproduced to 4 decimals",
            total - mismatches.len()
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("temporal order, Example 1", criterion_1),
        ("spatial order, Example 1", criterion_2),
        ("both ladders, Example 2", criterion_3),
        ("discontinuous data, Example 3", criterion_4),
        ("exactness on linear-in-time polynomials", criterion_5),
        ("property suites", criterion_6),
        ("convergence-order arithmetic", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.summary
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
