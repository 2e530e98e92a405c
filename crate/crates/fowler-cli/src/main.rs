//! `fowler` — reproducible file-based front end for the cylinder laboratory.
//!
//! Exit codes: 0 success, 1 numerical/internal failure, 2 usage/validation.
//! Failures print one machine-parsable line: `ERROR <CODE>: <detail>`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fowler::error::Error as CoreError;
use fowler::invariants;
use fowler::io;
use fowler::model::{derive_params, spherical_state, Params};
use fowler::ode::{integrate, CylState, Method, StepperConfig, Trajectory};
use fowler::shooting::{atlas, atlas_serial, with_worker_count, AtlasRow, DelaunayOrbit};
use fowler::verify;

#[derive(Parser)]
#[command(name = "fowler", version, about = "Cylinder dynamics for the critical fourth-order Gross-Pitaevskii system")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print every dimension-derived constant for (n, p)
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the cylinder system from a JSON run configuration
    Integrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve one Delaunay orbit: b(a), fundamental period, one-period trace
    Delaunay {
        #[arg(long)]
        n: u32,
        /// Necksize a in (0, a0)
        #[arg(long)]
        a: f64,
        /// One-period trajectory CSV (events sidecar written next to it)
        #[arg(long)]
        orbit_out: PathBuf,
        /// Orbit summary JSON (a, b, T_a, H, residual)
        #[arg(long)]
        row_out: PathBuf,
    },
    /// Sweep necksizes and write the atlas CSV
    Atlas {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        a_min: f64,
        #[arg(long)]
        a_max: f64,
        /// Number of grid points (>= 1; endpoints included)
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Worker count (default: all cores; FOWLER_THREADS overrides)
        #[arg(long)]
        jobs: Option<usize>,
        /// Force the sequential sweep
        #[arg(long)]
        sequential: bool,
    },
    /// Classify a sampled radial profile by its Pohozaev invariant
    Classify {
        /// Input CSV with header r,u_1,...,u_p
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites; exit 0 iff every criterion passes
    Verify {
        /// Suite name or "all"
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

struct Failure {
    exit: i32,
    code: String,
    detail: String,
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure {
            exit: if e.is_usage() { 2 } else { 1 },
            code: e.code().to_string(),
            detail: e.to_string(),
        }
    }
}

fn read_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { exit: 2, code: "IO".into(), detail: format!("cannot read {}: {e}", path.display()) }
}

fn write_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { exit: 1, code: "IO".into(), detail: format!("cannot write {}: {e}", path.display()) }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| write_failure(path, e))
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("ERROR {}: {}", f.code, f.detail);
            std::process::exit(f.exit);
        }
    }
}

fn run(cmd: Cmd) -> Result<i32, Failure> {
    match cmd {
        Cmd::Constants { n, p, format, out } => {
            let params = derive_params(n, p)?;
            let text = match format {
                Format::Json => io::to_json(&params) + "\n",
                Format::Csv => constants_csv(&params),
            };
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Cmd::Integrate { config } => {
            let raw = fs::read_to_string(&config).map_err(|e| read_failure(&config, e))?;
            let cfg: RunConfig = serde_json::from_str(&raw).map_err(|e| Failure {
                exit: 2,
                code: "CONFIG".into(),
                detail: format!("{}: {e}", config.display()),
            })?;
            cmd_integrate(&cfg)
        }
        Cmd::Delaunay { n, a, orbit_out, row_out } => {
            let params = derive_params(n, 1)?;
            let orbit = DelaunayOrbit::solve(&params, a)?;
            let traj = orbit.one_period_trajectory();
            write_file(&orbit_out, &io::trajectory_csv(&params, &traj))?;
            write_file(&events_sidecar(&orbit_out), &io::events_json(&traj))?;
            let h = invariants::hamiltonian(&params, &CylState::scalar(0.0, orbit.a, 0.0, orbit.b, 0.0));
            let row = AtlasRow {
                a: orbit.a,
                b: orbit.b,
                period: orbit.period,
                hamiltonian: h,
                residual: orbit.residual,
                error: None,
            };
            write_file(&row_out, &(io::to_json(&row) + "\n"))?;
            Ok(0)
        }
        Cmd::Atlas { n, a_min, a_max, steps, out, jobs, sequential } => {
            let params = derive_params(n, 1)?;
            if steps == 0 || !a_min.is_finite() || a_min <= 0.0 || a_max < a_min {
                return Err(Failure {
                    exit: 2,
                    code: "INVALID_INPUT".into(),
                    detail: format!("need steps >= 1 and 0 < a-min <= a-max (got {a_min}, {a_max}, {steps})"),
                });
            }
            let grid: Vec<f64> = if steps == 1 {
                vec![a_min]
            } else {
                (0..steps)
                    .map(|k| a_min + (a_max - a_min) * k as f64 / (steps - 1) as f64)
                    .collect()
            };
            let rows = if sequential {
                atlas_serial(&params, &grid)
            } else {
                with_worker_count(worker_count(jobs)?, || atlas(&params, &grid))
            };
            write_file(&out, &io::atlas_csv(&rows))?;
            Ok(0)
        }
        Cmd::Classify { input, n, out } => {
            let raw = fs::read_to_string(&input).map_err(|e| read_failure(&input, e))?;
            let grid = io::parse_radial_grid_csv(&raw)?;
            let params = derive_params(n, grid.components())?;
            let report = fowler::classify::classify(&grid, &params)?;
            write_file(&out, &(io::to_json(&report) + "\n"))?;
            Ok(0)
        }
        Cmd::Verify { suite, jobs } => {
            let results =
                with_worker_count(worker_count(jobs)?, || verify::run_suite(&suite))?;
            let mut all_pass = true;
            for r in &results {
                println!("{}", r.line());
                all_pass &= r.pass;
            }
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

/// FOWLER_THREADS beats the --jobs flag; absent means rayon's default.
fn worker_count(jobs: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var("FOWLER_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure {
                exit: 2,
                code: "CONFIG".into(),
                detail: format!("FOWLER_THREADS must be a nonnegative integer (got {s:?})"),
            }),
        Err(_) => Ok(jobs),
    }
}

fn events_sidecar(path: &Path) -> PathBuf {
    path.with_extension("events.json")
}

fn constants_csv(p: &Params) -> String {
    let f = io::fmt_float;
    format!(
        "n,p,gamma,c,chat,k0,k2,j0,sobolev_exp,a0,root_1,root_2,root_3,root_4,sphere_area\n\
         {},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        p.n,
        p.p,
        f(p.gamma),
        f(p.c),
        f(p.chat),
        f(p.k0),
        f(p.k2),
        f(p.j0),
        f(p.sobolev_exp),
        f(p.a0),
        f(p.char_roots[0]),
        f(p.char_roots[1]),
        f(p.char_roots[2]),
        f(p.char_roots[3]),
        f(p.sphere_area)
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    n: u32,
    #[serde(default = "default_p")]
    p: usize,
    init: InitSpec,
    /// Component weights for spherical/cauchy inits (default: uniform unit vector).
    #[serde(default)]
    lambda: Option<Vec<f64>>,
    t_span: [f64; 2],
    #[serde(default = "default_method")]
    method: String,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    abs_tol: Option<f64>,
    #[serde(default)]
    rel_tol: Option<f64>,
    #[serde(default)]
    divergence_bound: Option<f64>,
    #[serde(default)]
    zero_tolerance: Option<f64>,
    #[serde(default = "default_record_every")]
    record_every: usize,
    trajectory_out: PathBuf,
    #[serde(default)]
    events_out: Option<PathBuf>,
    invariants_out: PathBuf,
}

fn default_p() -> usize {
    1
}

fn default_method() -> String {
    "rk4".into()
}

fn default_record_every() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InitSpec {
    Spherical { mu: f64 },
    Cauchy { a: f64, b: f64 },
    State { t: f64, v: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>, d3: Vec<f64> },
}

fn cmd_integrate(cfg: &RunConfig) -> Result<i32, Failure> {
    let params = derive_params(cfg.n, cfg.p)?;
    let lambda = match &cfg.lambda {
        Some(l) => {
            if l.len() != cfg.p {
                return Err(Failure {
                    exit: 2,
                    code: "CONFIG".into(),
                    detail: format!("lambda has {} entries for p = {}", l.len(), cfg.p),
                });
            }
            l.clone()
        }
        None => vec![1.0 / (cfg.p as f64).sqrt(); cfg.p],
    };

    let init: CylState = match &cfg.init {
        InitSpec::Spherical { mu } => {
            let scalar = spherical_state(&params, *mu, cfg.t_span[0])?;
            scalar.scaled(&lambda)
        }
        InitSpec::Cauchy { a, b } => {
            let mut s = CylState::cauchy(*a, *b, &lambda);
            s.t = cfg.t_span[0];
            s
        }
        InitSpec::State { t, v, d1, d2, d3 } => {
            if [v.len(), d1.len(), d2.len(), d3.len()] != [cfg.p; 4] {
                return Err(Failure {
                    exit: 2,
                    code: "CONFIG".into(),
                    detail: "state init vectors must all have length p".into(),
                });
            }
            let comps = (0..cfg.p)
                .map(|i| fowler::ode::Comp { v: v[i], d1: d1[i], d2: d2[i], d3: d3[i] })
                .collect();
            CylState::new(*t, comps)
        }
    };

    let method = match cfg.method.as_str() {
        "rk4" => Method::FixedRk4 { dt: cfg.dt.unwrap_or(1e-3) },
        "adaptive" => Method::Adaptive45 {
            abs_tol: cfg.abs_tol.unwrap_or(1e-10),
            rel_tol: cfg.rel_tol.unwrap_or(1e-10),
        },
        other => {
            return Err(Failure {
                exit: 2,
                code: "CONFIG".into(),
                detail: format!("method must be \"rk4\" or \"adaptive\" (got {other:?})"),
            })
        }
    };
    let stepper = StepperConfig {
        method,
        t_end: cfg.t_span[1],
        divergence_bound: cfg
            .divergence_bound
            .unwrap_or_else(|| StepperConfig::default_divergence_bound(&params)),
        zero_tolerance: cfg.zero_tolerance.unwrap_or(1e-12),
        record_every: cfg.record_every,
    };

    let traj: Trajectory = integrate(&params, &init, &stepper)?;
    write_file(&cfg.trajectory_out, &io::trajectory_csv(&params, &traj))?;
    let events_path = cfg
        .events_out
        .clone()
        .unwrap_or_else(|| events_sidecar(&cfg.trajectory_out));
    write_file(&events_path, &io::events_json(&traj))?;
    let report = invariants::report(&params, &traj)?;
    write_file(&cfg.invariants_out, &(io::to_json(&report) + "\n"))?;
    Ok(0)
}
