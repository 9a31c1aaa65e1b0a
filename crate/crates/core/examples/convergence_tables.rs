//! Spatial and temporal convergence sweeps for Example 1 or 2 with the
//! default ladders, written as CSV tables under `out/`.
//!
//! Rows whose step exceeds the stability limit of the explicit predictor
//! grow without bound; `stability_limit` shows where that limit lies.
//!
//! Usage: `cargo run --release --example convergence_tables [1|2]`

use fhn_osc::study::{render_csv, run_convergence_study, StudyConfig};

fn main() -> fhn_osc::Result<()> {
    let id = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let mut cfg = StudyConfig::for_example(id)?;
    cfg.snapshots.clear();
    let outcome = run_convergence_study(&cfg)?;
    for (path, rows) in &outcome.tables {
        println!("{}", path.display());
        print!("{}", render_csv(rows));
    }
    Ok(())
}
