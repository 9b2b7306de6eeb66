//! Backward-Euler integration of `∂t u = Δ log u` in the variable `w = log u`
//! with damped Newton iterations.
//!
//! Each step solves
//!
//! ```text
//! (e^w − u_old)/dt = Δ_h (w − b) + Δb
//! ```
//!
//! where `b` is a background log-factor with analytic Laplacian. With the
//! hyperbolic background `b = log h`, `Δb = 2h`, every member of the family
//! `(2t + α) h` is an exact solution of the discrete scheme; with the flat
//! background the scheme is the plain `(e^w − u_old)/dt = Δ_h w`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::discretization::{ConformalField, Grid};
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::geometry::{self, HyperbolicMetric};
use crate::report::CheckReport;

/// Dirichlet data imposed on the boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryStrategy {
    /// Trace of a closed-form solution.
    ExactTrace(ExactSolution),
    /// `(2t + α) h`, emulating the complete flow with hyperbolic ends.
    HyperbolicTrace { alpha: f64 },
    /// `(2t + 1) h_a`, the annulus upper barrier.
    AnnulusTrace { a: f64 },
    /// A fixed positive value.
    Constant(f64),
}

impl BoundaryStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            BoundaryStrategy::ExactTrace(sol) => sol.validate(),
            BoundaryStrategy::HyperbolicTrace { alpha } if !(*alpha >= 0.0) => Err(
                Error::InvalidInput(format!("hyperbolic trace needs alpha >= 0, got {alpha}")),
            ),
            BoundaryStrategy::AnnulusTrace { a } => HyperbolicMetric::Annulus(*a).validate(),
            BoundaryStrategy::Constant(c) if !(*c > 0.0 && c.is_finite()) => Err(
                Error::InvalidInput(format!("constant trace must be positive, got {c}")),
            ),
            _ => Ok(()),
        }
    }

    /// Background used when the problem does not name one.
    pub fn default_background(&self) -> Background {
        match self {
            BoundaryStrategy::HyperbolicTrace { .. } | BoundaryStrategy::AnnulusTrace { .. } => {
                Background::Hyperbolic
            }
            _ => Background::Flat,
        }
    }

    /// Trace value at a point of radius `r` and time `t`.
    pub fn value(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let r = x.hypot(y);
        let v = match self {
            BoundaryStrategy::ExactTrace(sol) => sol.eval_xy(x, y, t)?,
            BoundaryStrategy::HyperbolicTrace { alpha } => {
                (2.0 * t + alpha) * HyperbolicMetric::FullDisk.eval_radius(r)?
            }
            BoundaryStrategy::AnnulusTrace { a } => {
                (2.0 * t + 1.0) * HyperbolicMetric::Annulus(*a).eval_radius(r)?
            }
            BoundaryStrategy::Constant(c) => *c,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "boundary trace {v} at r={r}, t={t} is not positive"
            )));
        }
        Ok(v)
    }

    /// Trace values at the boundary nodes of `grid`.
    pub fn values(&self, grid: &Grid, t: f64) -> Result<Vec<f64>> {
        (grid.n_interior()..grid.len())
            .map(|i| {
                let (x, y) = grid.point(i);
                self.value(x, y, t)
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        match self {
            BoundaryStrategy::ExactTrace(sol) => format!("exact-trace({sol:?})"),
            BoundaryStrategy::HyperbolicTrace { alpha } => format!("hyperbolic-trace(alpha={alpha})"),
            BoundaryStrategy::AnnulusTrace { a } => format!("annulus-trace(a={a})"),
            BoundaryStrategy::Constant(c) => format!("constant({c})"),
        }
    }
}

/// Background log-factor `b` in the splitting `Δw = Δ_h(w − b) + Δb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Background {
    Flat,
    Hyperbolic,
}

impl Background {
    /// `(b, Δb)` with `b` at every node and `Δb` at the interior nodes.
    fn fields(&self, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Background::Flat => Ok((vec![0.0; grid.len()], vec![0.0; grid.n_interior()])),
            Background::Hyperbolic => {
                let b = (0..grid.len())
                    .map(|i| HyperbolicMetric::FullDisk.log_eval_radius(grid.radius(i)))
                    .collect::<Result<Vec<_>>>()?;
                let lap = (0..grid.n_interior())
                    .map(|i| 2.0 * geometry::h(grid.radius(i)))
                    .collect();
                Ok((b, lap))
            }
        }
    }
}

/// Newton controls shared by [`step`] and [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
            max_halvings: 20,
        }
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Workspace for steps on a fixed grid and background.
struct Stepper<'a> {
    grid: &'a Arc<Grid>,
    b: Vec<f64>,
    lap_b: Vec<f64>,
    bc: &'a BoundaryStrategy,
    opts: NewtonOptions,
}

impl Stepper<'_> {
    /// Scaled residual `dt·F/e^w`, a relative change of `u` per step.
    fn residual(&self, w: &[f64], u_old: &[f64], dt: f64, out: &mut Vec<f64>) -> f64 {
        let m = self.grid.n_interior();
        let diff: Vec<f64> = w.iter().zip(&self.b).map(|(w, b)| w - b).collect();
        let lap = self.grid.laplacian(&diff).expect("full-length field");
        out.clear();
        let mut worst = 0.0f64;
        for i in 0..m {
            let e = w[i].exp();
            let f = (e - u_old[i]) / dt - lap[i] - self.lap_b[i];
            out.push(f);
            worst = worst.max((dt * f / e).abs());
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    fn step(&self, u_old: &[f64], t_new: f64, dt: f64) -> Result<(Vec<f64>, StepStats)> {
        let m = self.grid.n_interior();
        let trace = self.bc.values(self.grid, t_new)?;
        let mut w: Vec<f64> = u_old.iter().map(|v| v.ln()).collect();
        for (wb, tv) in w[m..].iter_mut().zip(&trace) {
            *wb = tv.ln();
        }
        let zero_ring = vec![0.0; trace.len()];
        let mut f = Vec::with_capacity(m);
        let mut norm = self.residual(&w, u_old, dt, &mut f);
        let mut iterations = 0;
        while norm > self.opts.tol {
            if iterations == self.opts.max_iter {
                return Err(Error::NewtonFailure {
                    time: t_new,
                    dt,
                    residual: norm,
                    iterations,
                });
            }
            iterations += 1;
            let shift: Vec<f64> = w[..m].iter().map(|w| w.exp() / dt).collect();
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let delta = self.grid.solve_shifted(&shift, &rhs, &zero_ring, None)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            let mut trial = w.clone();
            let mut f_trial = Vec::with_capacity(m);
            for _ in 0..=self.opts.max_halvings {
                for i in 0..m {
                    trial[i] = w[i] + lambda * delta[i];
                }
                let n_trial = self.residual(&trial, u_old, dt, &mut f_trial);
                if n_trial < norm {
                    std::mem::swap(&mut w, &mut trial);
                    std::mem::swap(&mut f, &mut f_trial);
                    norm = n_trial;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonFailure {
                    time: t_new,
                    dt,
                    residual: norm,
                    iterations,
                });
            }
        }
        let u: Vec<f64> = w.iter().map(|w| w.exp()).collect();
        if let Some(bad) = u.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Internal(format!("positivity lost in log variable: {bad}")));
        }
        Ok((
            u,
            StepStats {
                iterations,
                residual: norm,
            },
        ))
    }

    /// One step of size `dt`, retried as two half steps on failure down to
    /// `dt_min`.
    fn advance(
        &self,
        u_old: &[f64],
        t_old: f64,
        dt: f64,
        dt_min: f64,
    ) -> Result<(Vec<f64>, StepStats, f64)> {
        match self.step(u_old, t_old + dt, dt) {
            Ok((u, s)) => Ok((u, s, dt)),
            Err(e @ (Error::NewtonFailure { .. } | Error::LinearSolve(_))) => {
                let half = 0.5 * dt;
                if half < dt_min * (1.0 - 1e-12) {
                    return Err(e);
                }
                let (mid, s1, d1) = self.advance(u_old, t_old, half, dt_min)?;
                let (end, s2, d2) = self.advance(&mid, t_old + half, half, dt_min)?;
                Ok((
                    end,
                    StepStats {
                        iterations: s1.iterations + s2.iterations,
                        residual: s1.residual.max(s2.residual),
                    },
                    d1.min(d2),
                ))
            }
            Err(e) => Err(e),
        }
    }
}

/// A single backward-Euler step from `u` over `dt`.
pub fn step(
    u: &ConformalField,
    bc: &BoundaryStrategy,
    background: Background,
    dt: f64,
    opts: NewtonOptions,
) -> Result<(ConformalField, StepStats)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    bc.validate()?;
    let (b, lap_b) = background.fields(u.grid())?;
    let stepper = Stepper {
        grid: u.grid(),
        b,
        lap_b,
        bc,
        opts,
    };
    let (values, stats) = stepper.step(u.values(), u.time() + dt, dt)?;
    Ok((ConformalField::new(u.grid().clone(), values, u.time() + dt)?, stats))
}

/// Initial data, boundary strategy and stepping parameters of one run.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub initial: ConformalField,
    pub bc: BoundaryStrategy,
    /// Defaults to [`BoundaryStrategy::default_background`].
    pub background: Option<Background>,
    pub t_end: f64,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Keep every `record_every`-th snapshot (the final one is always kept).
    pub record_every: usize,
}

impl FlowProblem {
    pub fn new(initial: ConformalField, bc: BoundaryStrategy, t_end: f64, dt: f64) -> Self {
        Self {
            initial,
            bc,
            background: None,
            t_end,
            dt,
            newton_tol: NewtonOptions::default().tol,
            newton_max_iter: NewtonOptions::default().max_iter,
            record_every: 1,
        }
    }

    pub fn with_background(mut self, background: Background) -> Self {
        self.background = Some(background);
        self
    }

    pub fn with_newton_tol(mut self, tol: f64) -> Self {
        self.newton_tol = tol;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= self.initial.time() && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end {} precedes the initial time {}",
                self.t_end,
                self.initial.time()
            )));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::InvalidInput("newton tolerance and iteration cap must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be >= 1".into()));
        }
        self.bc.validate()
    }

    pub fn background(&self) -> Background {
        self.background.unwrap_or_else(|| self.bc.default_background())
    }
}

/// Recorded snapshots of a run with per-step diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<ConformalField>,
    /// Newton iterations of every step (not only recorded ones).
    pub newton_iterations: Vec<usize>,
    /// Final scaled Newton residual of every step.
    pub max_residuals: Vec<f64>,
    pub dt: f64,
    /// Smallest sub-step used after automatic halving.
    pub min_dt_used: f64,
    pub bc: String,
    pub background: Background,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    pub fn last(&self) -> &ConformalField {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }

    /// Snapshot whose time is closest to `t`.
    pub fn at(&self, t: f64) -> &ConformalField {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time() - t).abs().total_cmp(&(b.time() - t).abs()))
            .expect("trajectory holds the initial snapshot")
    }

    pub fn is_complete(&self) -> bool {
        self.aborted.is_none()
    }

    /// Turns an aborted run into an error.
    pub fn into_result(self) -> Result<Self> {
        match &self.aborted {
            None => Ok(self),
            Some(msg) => Err(Error::Internal(format!("solver aborted: {msg}"))),
        }
    }

    /// One CSV per snapshot plus `manifest.json`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.snapshots.len());
        for (k, snap) in self.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:05}.csv");
            let mut out = std::io::BufWriter::new(fs::File::create(dir.join(&name))?);
            snap.write_csv(&mut out)?;
            files.push(name);
        }
        let manifest = Manifest {
            times: self.times(),
            files,
            grid: self.grid().describe(),
            bc: self.bc.clone(),
            background: self.background,
            dt: self.dt,
            diagnostics: Diagnostics {
                newton_iterations: &self.newton_iterations,
                max_residuals: &self.max_residuals,
                min_dt_used: self.min_dt_used,
                aborted: self.aborted.clone(),
            },
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    times: Vec<f64>,
    files: Vec<String>,
    grid: String,
    bc: String,
    background: Background,
    dt: f64,
    diagnostics: Diagnostics<'a>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    newton_iterations: &'a [usize],
    max_residuals: &'a [f64],
    min_dt_used: f64,
    aborted: Option<String>,
}

/// Runs the problem to `t_end` at uniform `dt` (the last step is shortened
/// when `t_end` is not a multiple of `dt`).
///
/// A step that still fails after halving down to `dt/64` stops the run; the
/// partial trajectory is returned with [`Trajectory::aborted`] set.
pub fn solve(problem: &FlowProblem) -> Result<Trajectory> {
    problem.validate()?;
    let grid = problem.initial.grid().clone();
    let background = problem.background();
    let (b, lap_b) = background.fields(&grid)?;
    let stepper = Stepper {
        grid: &grid,
        b,
        lap_b,
        bc: &problem.bc,
        opts: NewtonOptions {
            tol: problem.newton_tol,
            max_iter: problem.newton_max_iter,
            ..NewtonOptions::default()
        },
    };
    let t0 = problem.initial.time();
    let span = problem.t_end - t0;
    let steps = ((span / problem.dt) - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        snapshots: vec![problem.initial.clone()],
        newton_iterations: Vec::with_capacity(steps),
        max_residuals: Vec::with_capacity(steps),
        dt: problem.dt,
        min_dt_used: problem.dt,
        bc: problem.bc.describe(),
        background,
        aborted: None,
    };
    let mut u = problem.initial.values().to_vec();
    let mut t = t0;
    for n in 1..=steps {
        let t_next = if n == steps { problem.t_end } else { t0 + n as f64 * problem.dt };
        let dt = t_next - t;
        match stepper.advance(&u, t, dt, problem.dt / 64.0) {
            Ok((u_new, stats, dt_used)) => {
                u = u_new;
                t = t_next;
                traj.newton_iterations.push(stats.iterations);
                traj.max_residuals.push(stats.residual);
                traj.min_dt_used = traj.min_dt_used.min(dt_used);
                if n % problem.record_every == 0 || n == steps {
                    traj.snapshots.push(ConformalField::new(grid.clone(), u.clone(), t)?);
                }
            }
            Err(e) => {
                if traj.last().time() < t {
                    traj.snapshots.push(ConformalField::new(grid.clone(), u.clone(), t)?);
                }
                traj.aborted = Some(e.to_string());
                break;
            }
        }
    }
    Ok(traj)
}

/// Audits `low ≤ high` at every recorded time and node; the margin is the
/// smallest relative gap `(high − low)/high`.
pub fn comparison_check(low: &Trajectory, high: &Trajectory, tolerance: f64) -> Result<CheckReport> {
    if low.grid() != high.grid() || low.snapshots.len() != high.snapshots.len() {
        return Err(Error::InvalidInput("trajectories differ in grid or length".into()));
    }
    let mut margin = f64::INFINITY;
    let mut worst = (0.0, 0.0);
    for (a, b) in low.snapshots.iter().zip(&high.snapshots) {
        if (a.time() - b.time()).abs() > 1e-12 * (1.0 + a.time().abs()) {
            return Err(Error::InvalidInput(format!(
                "snapshot times differ: {} vs {}",
                a.time(),
                b.time()
            )));
        }
        for (x, y) in a.values().iter().zip(b.values()) {
            let gap = (y - x) / y;
            if gap < margin {
                margin = gap;
                worst = (*x, *y);
            }
        }
    }
    Ok(CheckReport::verdict("comparison", worst.0, worst.1, margin, margin >= -tolerance)
        .with_tolerance(tolerance)
        .with_grid(low.grid().describe())
        .with_dt(low.dt)
        .with_eps(low.grid().eps())
        .with_notes(format!("{} snapshots; margin = min (high - low)/high", low.snapshots.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::RadialGrid;

    fn radial(n: usize, eps: f64) -> Arc<Grid> {
        Arc::new(Grid::Radial(RadialGrid::new(n, eps).unwrap()))
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = radial(64, 0.1);
        let u = ConformalField::from_fn(g, 0.0, |_, _| 2.5).unwrap();
        let (next, stats) = step(
            &u,
            &BoundaryStrategy::Constant(2.5),
            Background::Flat,
            0.1,
            NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(next.values().iter().all(|v| (*v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn hyperbolic_family_is_exact_for_the_scheme() {
        let g = radial(128, 1.0 / 64.0);
        let sol = ExactSolution::hyperbolic(1.0, 1.0).unwrap();
        let u0 = sol.sample(g.clone(), 0.0).unwrap();
        let prob = FlowProblem::new(u0, BoundaryStrategy::HyperbolicTrace { alpha: 1.0 }, 0.5, 0.05);
        let traj = solve(&prob).unwrap();
        assert!(traj.is_complete());
        let last = traj.last();
        let want = sol.sample(g, last.time()).unwrap();
        for (a, b) in last.values().iter().zip(want.values()) {
            assert!((a / b - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn uneven_end_time_is_hit_exactly() {
        let g = radial(32, 0.1);
        let u0 = ConformalField::from_fn(g, 0.0, |_, _| 1.0).unwrap();
        let prob = FlowProblem::new(u0, BoundaryStrategy::Constant(1.0), 0.25, 0.1);
        let traj = solve(&prob).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.2, 0.25]);
    }

    #[test]
    fn comparison_of_identical_runs_has_zero_margin() {
        let g = radial(32, 0.1);
        let u0 = ConformalField::from_fn(g, 0.0, |x, _| 1.0 + x * x).unwrap();
        let prob = FlowProblem::new(u0, BoundaryStrategy::Constant(1.81), 0.1, 0.02);
        let a = solve(&prob).unwrap();
        let r = comparison_check(&a, &a, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, 0.0);
    }
}
