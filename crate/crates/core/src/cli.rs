//! The `logdiff` command line.
//!
//! ```text
//! logdiff <exact|solve|verify|sweep> [--config FILE] [--out DIR] [--n INT] [--dt REAL]
//!         [--eps REAL] [--mu REAL[,..]] [--delta REAL] [--alpha REAL] [--k REAL]
//!         [--p REAL] [--seed INT] [--workers INT] [--svg]
//! ```
//!
//! Exit codes: 0 all requested audits pass, 1 an audit failed, 2 bad
//! configuration, 3 solver abort or other runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::discretization::Region;
use crate::error::{Error, Result};
use crate::exact::{cigar_l1_mass, ExactSolution};
use crate::geometry::{DiskPoint, HyperbolicMetric};
use crate::harness::family::harnack_family;
use crate::harness::experiments::radial_grid;
use crate::harness::sharpness::{delta_mass_check, sharpness_sweep, write_sweep_csv, SweepRow};
use crate::harness::{run_check, ExperimentConfig, CHECKS};
use crate::report::{reports_to_json, CheckReport};
use crate::solver::{self, BoundaryStrategy, FlowProblem};
use crate::svg::{line_plot, Scale, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "logdiff", version, about = "Logarithmic fast diffusion on the unit disk")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $LOGDIFF_OUT or ./logdiff-out).
    #[arg(long, global = true, env = "LOGDIFF_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// One or more comma-separated values.
    #[arg(long, global = true, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    k: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for concurrent audits (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate closed forms.
    Exact {
        #[arg(value_enum)]
        what: ExactKind,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Radius of the evaluation point (or of the ball for masses).
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        /// Sub-ball radius or annulus inner radius for `metric`.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value_t = MetricKind::Full)]
        metric: MetricKind,
    },
    /// Run a flow and export the trajectory.
    Solve {
        #[arg(long, value_enum, default_value_t = Initial::Cigar)]
        initial: Initial,
        #[arg(long = "t-end", default_value_t = 0.2)]
        t_end: f64,
        /// Snapshot export stride.
        #[arg(long = "record-every", default_value_t = 10)]
        record_every: usize,
    },
    /// Run one named audit or all of them.
    Verify { check: String },
    /// Parameter sweeps of the closed forms.
    Sweep {
        #[arg(value_enum)]
        what: SweepKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExactKind {
    /// Scaled cigar u(r, t) for each --mu.
    Cigar,
    /// Mass of the scaled cigar in B_r at time t for each --mu.
    CigarMass,
    /// (2t + alpha) h_rho at radius r.
    Hyperbolic,
    /// Conformal factor of a hyperbolic metric at radius r.
    Metric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricKind {
    Full,
    SubBall,
    Annulus,
    Punctured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Initial {
    /// Scaled cigar with the first --mu, exact trace.
    Cigar,
    /// (2t + alpha) h with hyperbolic trace.
    Hyperbolic,
    /// First seeded rim-flat member h + bumps, hyperbolic trace.
    Family,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Sharpness,
    DeltaMass,
}

/// Keys accepted in the JSON config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    dt: Option<f64>,
    eps: Option<f64>,
    mu: Option<Vec<f64>>,
    delta: Option<f64>,
    alpha: Option<f64>,
    k: Option<f64>,
    p: Option<f64>,
    seed: Option<u64>,
    family_size: Option<usize>,
    t_end: Option<f64>,
    newton_tol: Option<f64>,
    horizon: Option<f64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    svg: Option<bool>,
}

struct Settings {
    exp: ExperimentConfig,
    out: PathBuf,
    workers: usize,
    svg: bool,
}

fn settings(common: &Common) -> Result<Settings> {
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut exp = ExperimentConfig::default();
    macro_rules! layer {
        ($($field:ident),*) => {$(
            if let Some(v) = file.$field.clone() { exp.$field = v; }
        )*};
    }
    layer!(n, dt, eps, mu, delta, alpha, k, p, seed, family_size, t_end, newton_tol, horizon);
    macro_rules! flag {
        ($($field:ident),*) => {$(
            if let Some(v) = common.$field.clone() { exp.$field = v; }
        )*};
    }
    flag!(n, dt, eps, mu, delta, alpha, k, p, seed);
    exp.validate()?;
    Ok(Settings {
        exp,
        out: common
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("logdiff-out")),
        workers: common.workers.or(file.workers).unwrap_or(0),
        svg: common.svg || file.svg.unwrap_or(false),
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_) | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let s = match settings(&cli.common) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(s.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Exact { what, t, r, rho, metric } => cmd_exact(&s, *what, *t, *r, *rho, *metric),
        Command::Solve { initial, t_end, record_every } => cmd_solve(&s, *initial, *t_end, *record_every),
        Command::Verify { check } => cmd_verify(&s, check),
        Command::Sweep { what } => cmd_sweep(&s, *what),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_exact(s: &Settings, what: ExactKind, t: f64, r: f64, rho: Option<f64>, metric: MetricKind) -> Result<i32> {
    let point = || DiskPoint::new(r, 0.0);
    match what {
        ExactKind::Cigar | ExactKind::CigarMass => {
            let mut rows = Vec::new();
            for &mu in &s.exp.mu {
                let value = match what {
                    ExactKind::Cigar => ExactSolution::cigar_scaled(mu)?.eval(point()?, t)?,
                    _ => cigar_l1_mass(mu, t, if r == 0.0 { 1.0 } else { r })?,
                };
                println!("{value:.16e}");
                rows.push(SweepRow { mu, t, value });
            }
            fs::create_dir_all(&s.out)?;
            let name = if matches!(what, ExactKind::Cigar) { "exact_cigar.csv" } else { "exact_cigar_mass.csv" };
            let mut f = fs::File::create(s.out.join(name))?;
            write_sweep_csv(&rows, &mut f)?;
        }
        ExactKind::Hyperbolic => {
            let sol = ExactSolution::hyperbolic(s.exp.alpha, rho.unwrap_or(1.0))?;
            println!("{:.16e}", sol.eval(point()?, t)?);
        }
        ExactKind::Metric => {
            let m = match metric {
                MetricKind::Full => HyperbolicMetric::FullDisk,
                MetricKind::SubBall => HyperbolicMetric::SubBall(rho.unwrap_or(0.5)),
                MetricKind::Annulus => HyperbolicMetric::Annulus(rho.unwrap_or(0.5)),
                MetricKind::Punctured => HyperbolicMetric::Punctured,
            };
            println!("{:.16e}", m.eval_radius(r)?);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_solve(s: &Settings, initial: Initial, t_end: f64, record_every: usize) -> Result<i32> {
    let grid = radial_grid(s.exp.n, s.exp.eps)?;
    let (u0, bc) = match initial {
        Initial::Cigar => {
            let sol = ExactSolution::cigar_scaled(s.exp.mu[0])?;
            (sol.sample(grid, 0.0)?, BoundaryStrategy::ExactTrace(sol))
        }
        Initial::Hyperbolic => {
            let sol = ExactSolution::hyperbolic(s.exp.alpha, 1.0)?;
            (sol.sample(grid, 0.0)?, BoundaryStrategy::HyperbolicTrace { alpha: s.exp.alpha })
        }
        Initial::Family => {
            let d = &harnack_family(s.exp.seed, 1)[0];
            (d.sample(grid)?, BoundaryStrategy::HyperbolicTrace { alpha: 1.0 })
        }
    };
    let problem = FlowProblem::new(u0, bc, t_end, s.exp.dt)
        .with_newton_tol(s.exp.newton_tol)
        .with_record_every(record_every.max(1));
    let traj = solver::solve(&problem)?;
    let dir = s.out.join("solve");
    traj.export(&dir)?;
    let last = traj.last();
    println!(
        "t={:.6e} sup={:.6e} sup_B1/2={:.6e} steps={} snapshots={} -> {}",
        last.time(),
        last.sup(Region::Full)?,
        last.sup(Region::Ball(0.5))?,
        traj.newton_iterations.len(),
        traj.snapshots.len(),
        dir.display()
    );
    if let Some(msg) = &traj.aborted {
        eprintln!("solver aborted: {msg}");
        return Ok(EXIT_SOLVER);
    }
    Ok(EXIT_OK)
}

fn finish_reports(out: &Path, stem: &str, reports: &[CheckReport]) -> Result<i32> {
    fs::create_dir_all(out)?;
    fs::write(out.join(format!("{stem}.json")), reports_to_json(reports)? + "\n")?;
    let mut sorted: Vec<&CheckReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for r in &sorted {
        println!("{}", r.summary_line());
    }
    let failed: Vec<&str> = sorted.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{}", serde_json::json!({ "failed": failed, "report": format!("{stem}.json") }));
        Ok(EXIT_AUDIT)
    }
}

fn cmd_verify(s: &Settings, check: &str) -> Result<i32> {
    let names: Vec<&str> = if check == "all" {
        CHECKS.to_vec()
    } else if CHECKS.contains(&check) {
        vec![check]
    } else {
        return Err(Error::Config(format!(
            "unknown check '{check}'; expected one of {} or 'all'",
            CHECKS.join(", ")
        )));
    };
    let results: Vec<Result<Vec<CheckReport>>> = names.par_iter().map(|n| run_check(n, &s.exp)).collect();
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    finish_reports(&s.out, &format!("verify_{check}"), &reports)
}

fn cmd_sweep(s: &Settings, what: SweepKind) -> Result<i32> {
    fs::create_dir_all(&s.out)?;
    let (stem, rows, reports) = match what {
        SweepKind::Sharpness => {
            let delta = s.exp.delta;
            if !(delta < 1.0) {
                return Err(Error::Config(format!("sharpness sweep needs delta < 1, got {delta}")));
            }
            let sweep = sharpness_sweep(&s.exp.mu, delta, 5.0)?;
            ("sharpness", sweep.rows, sweep.reports)
        }
        SweepKind::DeltaMass => {
            let (rows, report) = delta_mass_check(&s.exp.mu, 0.5, 0.5)?;
            ("delta_mass", rows, vec![report])
        }
    };
    let mut f = fs::File::create(s.out.join(format!("{stem}.csv")))?;
    write_sweep_csv(&rows, &mut f)?;
    if s.svg {
        let mut times: Vec<f64> = rows.iter().map(|r| r.t).collect();
        times.dedup();
        let series: Vec<Series> = times
            .iter()
            .map(|&t| Series {
                label: format!("t = {t}"),
                points: rows.iter().filter(|r| r.t == t).map(|r| (r.mu, r.value)).collect(),
            })
            .collect();
        let y_label = if matches!(what, SweepKind::Sharpness) { "u(0, t)" } else { "relative mass error" };
        let svg = line_plot(stem, "mu", y_label, Scale::Log, Scale::Log, &series);
        fs::write(s.out.join(format!("{stem}.svg")), svg)?;
    }
    finish_reports(&s.out, stem, &reports)
}
