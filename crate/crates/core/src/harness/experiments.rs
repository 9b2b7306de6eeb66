//! Flow experiments shared by the CLI checks and the acceptance suite:
//! Harnack runs on rim-flat data, the annulus sandwich, exponential
//! integrability of `ψ(0)` and residual refinement studies.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::discretization::{ConformalField, Grid, RadialGrid};
use crate::error::Result;
use crate::exact::{self, ExactSolution};
use crate::geometry::{self, HyperbolicMetric};
use crate::potential::{
    self, brezis_merle_audit, evolve_psi, harnack, harnack_residual, max_abs, HarnackField, HarnackForm,
    PotentialState, PsiAccumulation,
};
use crate::report::CheckReport;
use crate::solver::{self, BoundaryStrategy, FlowProblem, Trajectory};

use super::family::InitialDatum;

pub fn radial_grid(n: usize, eps: f64) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::Radial(RadialGrid::new(n, eps)?)))
}

/// Resolution and stepping of a Harnack run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackConfig {
    pub n: usize,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        Self {
            n: 256,
            eps: 1.0 / 64.0,
            dt: 5e-3,
            t_end: 0.5,
            newton_tol: 1e-12,
        }
    }
}

/// The flow of rim-flat data with hyperbolic trace `(2t+1)h`, its potential
/// and both forms of the Harnack quantity.
#[derive(Debug, Clone)]
pub struct HarnackRun {
    pub traj: Trajectory,
    pub state: PotentialState,
    pub h_v: HarnackField,
    pub h_p: HarnackField,
}

pub fn harnack_run(datum: &InitialDatum, cfg: &HarnackConfig) -> Result<HarnackRun> {
    let grid = radial_grid(cfg.n, cfg.eps)?;
    harnack_run_on(datum.sample(grid)?, cfg)
}

pub fn harnack_run_on(v0: ConformalField, cfg: &HarnackConfig) -> Result<HarnackRun> {
    let problem = FlowProblem::new(v0, BoundaryStrategy::HyperbolicTrace { alpha: 1.0 }, cfg.t_end, cfg.dt)
        .with_newton_tol(cfg.newton_tol);
    let traj = solver::solve(&problem)?.into_result()?;
    let state = evolve_psi(&traj, PsiAccumulation::Implicit)?;
    let h_v = harnack(&traj, &state, HarnackForm::VForm)?;
    let h_p = harnack(&traj, &state, HarnackForm::PotentialForm)?;
    Ok(HarnackRun { traj, state, h_v, h_p })
}

impl HarnackRun {
    /// `max H` over nodes and `t > 0`.
    pub fn max_h(&self) -> f64 {
        self.h_v.max_positive_time()
    }

    /// `max |H(·, 0)|` over both forms.
    pub fn initial_h(&self) -> f64 {
        self.h_v.values[0]
            .iter()
            .chain(&self.h_p.values[0])
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |∂tH − Δ_h H/v + v₀/v|` over interior nodes and inner times.
    pub fn evolution_residual(&self) -> Result<f64> {
        Ok(max_abs(&harnack_residual(&self.h_v, &self.traj)?))
    }

    /// Largest value of `∂tH − Δ_v H`, which should be `≤ 0`.
    pub fn subsolution_excess(&self) -> Result<f64> {
        let v0 = self.traj.snapshots[0].values();
        let res = harnack_residual(&self.h_v, &self.traj)?;
        let mut worst = f64::NEG_INFINITY;
        for (k, (_, r)) in res.iter().enumerate() {
            let v = self.traj.snapshots[k + 1].values();
            for (i, x) in r.iter().enumerate() {
                worst = worst.max(x - v0[i] / v[i]);
            }
        }
        Ok(worst)
    }

    pub fn form_gap(&self) -> f64 {
        self.h_v.max_difference(&self.h_p)
    }
}

/// The exponential-integrability audit for rim-flat data: `f = v₀ − h`,
/// `t̃ = (1 + δ/2)/(4π)`, `η = ψ(0)/t̃` (so `Δη = f/t̃`) and `p = 1 + δ/3`.
pub fn brezis_merle_for(datum: &InitialDatum, grid: &Arc<Grid>, delta: f64) -> Result<CheckReport> {
    let f = datum.excess_samples(grid);
    let psi0 = potential::poisson_zero_dirichlet(grid, &f)?;
    let t_tilde = (1.0 + 0.5 * delta) / (4.0 * PI);
    let eta: Vec<f64> = psi0.iter().map(|p| p / t_tilde).collect();
    let source: Vec<f64> = f.iter().map(|v| v / t_tilde).collect();
    let mut r = brezis_merle_audit(grid, &eta, &source, 1.0 + delta / 3.0)?;
    r.push_note(format!("member {}, bump mass {:.4}, delta={delta}", datum.index, datum.mass));
    Ok(r)
}

/// Margins of `1 ≤ v/((2t+1)h) ≤ h_a/h` on the band `[band_inner, 1 − ε]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichOutcome {
    /// `min (ratio − 1)`.
    pub lower_margin: f64,
    /// `min (h_a/h − ratio)`.
    pub upper_margin: f64,
    /// `max (ratio − 1)` on the outermost band `[1 − 4ε, 1 − ε]`.
    pub rim_slack: f64,
}

/// Flows `v₀` with trace `(2t+1)h_a` and audits the sandwich on the band.
pub fn sandwich_run(
    v0: &InitialDatum,
    n: usize,
    eps: f64,
    a: f64,
    t_end: f64,
    dt: f64,
    band_inner: f64,
) -> Result<SandwichOutcome> {
    let grid = radial_grid(n, eps)?;
    let problem = FlowProblem::new(v0.sample(grid.clone())?, BoundaryStrategy::AnnulusTrace { a }, t_end, dt)
        .with_newton_tol(1e-12);
    let traj = solver::solve(&problem)?.into_result()?;
    let annulus = HyperbolicMetric::Annulus(a);
    let mut out = SandwichOutcome {
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
        rim_slack: 0.0,
    };
    for snap in &traj.snapshots {
        let t = snap.time();
        for (i, v) in snap.values().iter().enumerate() {
            let r = grid.radius(i);
            if r < band_inner {
                continue;
            }
            let h = geometry::h(r);
            let ratio = v / ((2.0 * t + 1.0) * h);
            out.lower_margin = out.lower_margin.min(ratio - 1.0);
            out.upper_margin = out.upper_margin.min(annulus.eval_radius(r)? / h - ratio);
            if r >= 1.0 - 4.0 * eps && t > 0.0 {
                out.rim_slack = out.rim_slack.max(ratio - 1.0);
            }
        }
    }
    Ok(out)
}

/// Max-norm of the discrete residual of `sol` on each grid.
pub fn residual_norms(sol: &ExactSolution, grids: &[Arc<Grid>], t: f64, dt: f64) -> Result<Vec<f64>> {
    grids
        .iter()
        .map(|g| Ok(exact::residual(sol, g, t, dt)?.into_iter().fold(0.0, f64::max)))
        .collect()
}

/// Successive ratios `e_k / e_{k+1}`.
pub fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Runs cigar data with the exact trace and returns the largest relative
/// error against the closed form over all snapshots.
pub fn cigar_fidelity(mu: f64, n: usize, eps: f64, dt: f64, t_end: f64) -> Result<f64> {
    let sol = ExactSolution::cigar_scaled(mu)?;
    let grid = radial_grid(n, eps)?;
    let problem = FlowProblem::new(sol.sample(grid.clone(), 0.0)?, BoundaryStrategy::ExactTrace(sol.clone()), t_end, dt)
        .with_newton_tol(1e-12);
    let traj = solver::solve(&problem)?.into_result()?;
    let mut worst = 0.0f64;
    for snap in &traj.snapshots {
        let want = sol.sample(grid.clone(), snap.time())?;
        for (a, b) in snap.values().iter().zip(want.values()) {
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    Ok(worst)
}
