use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fhn_osc::model::example_problem;
use fhn_osc::oracle::{oracle_solve_with, OracleOptions};
use fhn_osc::study::{parse_config, parse_list, parse_list_allow_zero, run_convergence_study, StudyConfig, Sweep};
use fhn_osc::timegrid::GridMode;

#[derive(Parser)]
#[command(name = "fhn", about = "FitzHugh–Nagumo collocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run refinement sweeps and write convergence tables.
    Solve {
        #[arg(long)]
        example: Option<u32>,
        /// Comma list; `2^-k`, `c*2^-k` and `2^-a..2^-b` are accepted.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "L")]
        gauss_points: Option<usize>,
        #[arg(long)]
        grid: Option<GridMode>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma list of times at which to write solution snapshots.
        #[arg(long)]
        snapshots: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
        /// TOML study file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the finite-difference reference solver.
    Oracle {
        #[arg(long)]
        example: u32,
        #[arg(long, default_value_t = 128)]
        nx: usize,
        #[arg(long, default_value_t = 512)]
        nt: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn solve(cmd: Command) -> fhn_osc::Result<bool> {
    let Command::Solve {
        example,
        h,
        tau,
        m,
        gauss_points,
        grid,
        out,
        snapshots,
        resolution,
        config,
    } = cmd
    else {
        unreachable!()
    };
    let mut cfg = match (&config, example) {
        (Some(path), _) => parse_config(&std::fs::read_to_string(path)?)?,
        (None, Some(id)) => StudyConfig::for_example(id)?,
        (None, None) => return Err(fhn_osc::Error::InvalidArgument("need --example or --config".into())),
    };
    if let Some(id) = example {
        if id != cfg.example {
            let keep = cfg.clone();
            cfg = StudyConfig::for_example(id)?;
            cfg.degree = keep.degree;
            cfg.gauss_points = keep.gauss_points;
            cfg.grid = keep.grid;
            cfg.out_dir = keep.out_dir;
        }
    }
    if h.is_some() || tau.is_some() {
        let first = cfg.sweeps[0].clone();
        let h = h.map(|s| parse_list(&s)).transpose()?.unwrap_or(first.h);
        let tau = tau.map(|s| parse_list(&s)).transpose()?.unwrap_or(first.tau);
        let name = match (h.len() > 1, tau.len() > 1) {
            (true, false) => "spatial",
            (false, true) => "temporal",
            (false, false) => "single",
            (true, true) => "grid",
        };
        cfg.sweeps = vec![Sweep {
            name: name.into(),
            h,
            tau,
        }];
    }
    if let Some(v) = m {
        cfg.degree = v;
    }
    if let Some(v) = gauss_points {
        cfg.gauss_points = v;
    }
    if let Some(v) = grid {
        cfg.grid = v;
    }
    if let Some(v) = out {
        cfg.out_dir = v;
    }
    if let Some(s) = snapshots {
        cfg.snapshots = parse_list_allow_zero(&s)?;
    }
    if let Some(v) = resolution {
        cfg.resolution = v;
    }

    let outcome = run_convergence_study(&cfg)?;
    for (path, rows) in &outcome.tables {
        println!("{}", path.display());
        for r in rows {
            let err = r
                .err
                .map(|e| format!("err_u {:.4e}  err_v {:.4e}", e[0], e[1]))
                .unwrap_or_else(|| "no exact solution".into());
            let co = match r.order {
                [Some(a), Some(b)] => format!("  CO {a:.4} {b:.4}"),
                _ => String::new(),
            };
            println!("  h {:.4e}  tau {:.4e}  {err}{co}  [{}]", r.h, r.tau, r.status);
        }
    }
    for p in &outcome.snapshots {
        println!("{}", p.display());
    }
    Ok(outcome.all_ok())
}

fn oracle(example: u32, nx: usize, nt: usize, out: PathBuf) -> fhn_osc::Result<bool> {
    let problem = example_problem(example)?;
    let sol = oracle_solve_with(&problem, nx, nx, nt, OracleOptions { store_every: nt })?;
    std::fs::create_dir_all(&out)?;
    let snap = sol.final_snapshot();
    let path = out.join(format!("oracle_example{example}_nx={nx}_nt={nt}.csv"));
    let to_err = |e: csv::Error| fhn_osc::Error::InvalidArgument(format!("csv output: {e}"));
    let mut w = csv::Writer::from_path(&path).map_err(to_err)?;
    w.write_record(["x", "y", "u", "v"]).map_err(to_err)?;
    for j in 0..=sol.ny {
        for i in 0..=sol.nx {
            let [x, y] = sol.node(i, j);
            let (u, v) = (snap.fields[0][(i, j)], snap.fields[1][(i, j)]);
            w.write_record([x, y, u, v].map(|z| format!("{z:.9e}")))
                .map_err(to_err)?;
        }
    }
    w.flush()?;
    println!("{}", path.display());
    if let Some(v) = sol.validation {
        println!("relative max error against the exact solution: {:.4e}", v.relative());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        c @ Command::Solve { .. } => solve(c),
        Command::Oracle { example, nx, nt, out } => oracle(example, nx, nt, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
