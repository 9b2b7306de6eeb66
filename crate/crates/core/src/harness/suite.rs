//! Named checks behind `logdiff verify`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{truncated_l1, Barrier, DiskGrid, Grid, Region};
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::geometry::{metric_ordering_check, pullback_closed_form, MobiusMap};
use crate::potential::{corollary_bounds, h_samples};
use crate::report::CheckReport;
use crate::solver::{self, BoundaryStrategy, FlowProblem};

use super::experiments::{
    brezis_merle_for, cigar_fidelity, harnack_run, radial_grid, ratios, residual_norms, sandwich_run, HarnackConfig,
};
use super::family::{generic_family, harnack_family};
use super::gamma::{build_v0_auto, v0_postconditions};
use super::sharpness::{delta_mass_check, sharpness_sweep};
use super::theorems::{
    audit_theorem_1_1, audit_theorem_1_3, audit_theorem_4_1, claim2_inequality_check, uniformity_report,
    SolverConfig,
};

pub const CHECKS: &[&str] = &[
    "brezis-merle",
    "corollary",
    "delta-mass",
    "gamma",
    "harnack",
    "invariance",
    "metric",
    "residuals",
    "sandwich",
    "sharpness",
    "solver",
    "theorem-1-1",
    "theorem-1-3",
    "theorem-4-1",
];

/// Parameters shared by all checks. Every field has a default, so a JSON
/// config may name only what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub dt: f64,
    pub eps: f64,
    pub mu: Vec<f64>,
    pub delta: f64,
    pub alpha: f64,
    pub k: f64,
    pub p: f64,
    pub seed: u64,
    pub family_size: usize,
    pub t_end: f64,
    pub newton_tol: f64,
    pub horizon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dt: 5e-3,
            eps: 1.0 / 64.0,
            mu: vec![1e-2, 1e-4, 1e-6],
            delta: 0.1,
            alpha: 1.0,
            k: 0.0,
            p: 2.0,
            seed: 2024,
            family_size: 10,
            t_end: 0.5,
            newton_tol: 1e-10,
            horizon: 10.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 16 {
            return bad(format!("n must be >= 16, got {}", self.n));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.eps > 0.0 && self.eps <= 0.2) {
            return bad(format!("eps must lie in (0, 0.2], got {}", self.eps));
        }
        if self.mu.is_empty() || self.mu.iter().any(|m| !(*m > 0.0 && *m <= 1.0)) {
            return bad(format!("mu values must lie in (0, 1], got {:?}", self.mu));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return bad(format!("k must be >= 0, got {}", self.k));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if self.family_size == 0 {
            return bad("family_size must be >= 1".into());
        }
        if !(self.t_end > 0.0) || !(self.newton_tol > 0.0) || !(self.horizon > 0.0) {
            return bad("t_end, newton_tol and horizon must be positive".into());
        }
        Ok(())
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            newton_tol: self.newton_tol,
            horizon: self.horizon,
            ..SolverConfig::default()
        }
    }

    fn harnack(&self) -> HarnackConfig {
        HarnackConfig {
            n: self.n,
            eps: self.eps,
            dt: self.dt,
            t_end: self.t_end,
            newton_tol: 1e-12,
        }
    }

    fn grid_note(&self) -> String {
        format!("radial(n={}, eps={})", self.n, self.eps)
    }
}

/// Runs one named check.
pub fn run_check(name: &str, cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    match name {
        "brezis-merle" => check_brezis_merle(cfg),
        "corollary" => check_corollary(cfg),
        "delta-mass" => Ok(vec![delta_mass_check(&cfg.mu, 0.5, 0.5)?.1]),
        "gamma" => check_gamma(cfg),
        "harnack" => check_harnack(cfg),
        "invariance" => check_invariance(cfg),
        "metric" => check_metric(cfg),
        "residuals" => check_residuals(cfg),
        "sandwich" => check_sandwich(cfg),
        "sharpness" => Ok(sharpness_sweep(&cfg.mu, cfg.delta.min(0.99), 5.0)?.reports),
        "solver" => check_solver(cfg),
        "theorem-1-1" => check_theorem_1_1(cfg),
        "theorem-1-3" => check_theorem_1_3(cfg),
        "theorem-4-1" => check_theorem_4_1(cfg),
        other => Err(Error::Config(format!(
            "unknown check '{other}'; expected one of {} or 'all'",
            CHECKS.join(", ")
        ))),
    }
}

fn worst<'a>(reports: impl IntoIterator<Item = &'a CheckReport>) -> Option<CheckReport> {
    reports
        .into_iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .cloned()
}

fn check_metric(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let samples = |a: f64| -> Vec<f64> { (1..=100).map(|i| a + (1.0 - a) * i as f64 / 101.0).collect() };
    let mut a = metric_ordering_check(0.5, &samples(0.5))?;
    a.name = "metric_ordering_a0.5".into();
    let mut b = metric_ordering_check(0.1, &samples(0.1))?;
    b.name = "metric_ordering_a0.1".into();
    let alpha = cfg.alpha.max(1.0);
    let rho = alpha.powf(-0.5);
    let radii: Vec<f64> = (0..50).map(|i| rho * i as f64 / 50.0).collect();
    Ok(vec![a, b, claim2_inequality_check(alpha, &radii)?])
}

fn check_residuals(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let eps = 0.1;
    let ns = [cfg.n, 2 * cfg.n, 4 * cfg.n];
    let grids = ns.iter().map(|&n| radial_grid(n, eps)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let cases = [
        ("residual_hyperbolic", ExactSolution::hyperbolic(cfg.alpha.max(0.5), 1.0)?),
        ("residual_cigar", ExactSolution::cigar_scaled(cfg.mu[0])?),
    ];
    for (name, sol) in cases {
        let errs = residual_norms(&sol, &grids, 0.5, 1e-5)?;
        let r = ratios(&errs);
        let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(
            CheckReport::verdict(name, min, 3.5, min - 3.5, min >= 3.5)
                .with_eps(eps)
                .with_notes(format!(
                    "n={ns:?}, max residuals {:?}; lhs = smallest refinement ratio",
                    errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
                )),
        );
    }
    Ok(out)
}

fn check_solver(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let err = cigar_fidelity(0.1, cfg.n, cfg.eps, cfg.dt, 0.2)?;
    Ok(vec![CheckReport::upper_bound("solver_cigar_fidelity", err, 5e-3, 0.0)
        .with_grid(cfg.grid_note())
        .with_dt(cfg.dt)
        .with_eps(cfg.eps)
        .with_notes("max relative error vs closed form, mu=0.1, t <= 0.2")])
}

fn check_harnack(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let hc = cfg.harnack();
    let runs = harnack_family(cfg.seed, cfg.family_size)
        .par_iter()
        .map(|d| {
            let run = harnack_run(d, &hc)?;
            Ok((run.max_h(), run.initial_h(), run.form_gap(), run.subsolution_excess()?))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_h = runs.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let h0 = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let gap = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    let sub = runs.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    let tag = |r: CheckReport| r.with_grid(cfg.grid_note()).with_dt(cfg.dt).with_eps(cfg.eps);
    Ok(vec![
        tag(CheckReport::upper_bound("harnack_max", max_h, 0.0, 1e-2)
            .with_notes(format!("max H over {} members, t in (0, {}]", runs.len(), cfg.t_end))),
        tag(CheckReport::upper_bound("harnack_initial", h0, 0.0, 0.0).with_notes("max |H(0)|")),
        tag(CheckReport::upper_bound("harnack_forms", gap, 0.0, 0.5)
            .with_notes("max |H_potential - H_v|; discretization-level agreement")),
        tag(CheckReport::upper_bound("harnack_subsolution", sub, 0.0, 1e-6)
            .with_notes("max of dH/dt - Delta_v H")),
    ])
}

fn check_corollary(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let hc = cfg.harnack();
    let audits = harnack_family(cfg.seed, cfg.family_size)
        .par_iter()
        .map(|d| {
            let run = harnack_run(d, &hc)?;
            corollary_bounds(&run.traj, &run.state, 1e-6)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        worst(audits.iter().map(|a| &a.weak)).expect("non-empty family"),
        worst(audits.iter().map(|a| &a.strong)).expect("non-empty family"),
        worst(audits.iter().map(|a| &a.ordering)).expect("non-empty family"),
    ])
}

fn check_brezis_merle(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let grid = radial_grid(cfg.n, cfg.eps)?;
    let reports = harnack_family(cfg.seed, cfg.family_size)
        .iter()
        .map(|d| brezis_merle_for(d, &grid, cfg.delta))
        .collect::<Result<Vec<_>>>()?;
    let all_pass = reports.iter().all(|r| r.pass);
    let mut w = worst(&reports).expect("non-empty family");
    w.pass = all_pass;
    w.push_note(format!("worst of {} members", reports.len()));
    Ok(vec![w])
}

fn check_sandwich(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let datum = &harnack_family(cfg.seed, 1)[0];
    let s = sandwich_run(datum, cfg.n, cfg.eps, 0.5, 1.0, cfg.dt.max(1e-2), 0.9)?;
    let tag = |r: CheckReport| r.with_grid(cfg.grid_note()).with_dt(cfg.dt.max(1e-2)).with_eps(cfg.eps);
    Ok(vec![
        tag(CheckReport::verdict("sandwich_lower", s.lower_margin, 0.0, s.lower_margin, s.lower_margin >= -1e-3)
            .with_tolerance(1e-3)
            .with_notes("min v/((2t+1)h) - 1 on r in [0.9, 1-eps], t <= 1")),
        tag(CheckReport::verdict("sandwich_upper", s.upper_margin, 0.0, s.upper_margin, s.upper_margin >= -1e-3)
            .with_tolerance(1e-3)
            .with_notes(format!("min h_a/h - v/((2t+1)h); rim slack {:.3e}", s.rim_slack))),
    ])
}

fn check_gamma(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let grid = radial_grid(cfg.n, cfg.eps)?;
    let h = h_samples(&grid);
    let mut post = Vec::new();
    let mut budget_ok = true;
    let mut worst_slack = f64::INFINITY;
    for d in generic_family(cfg.seed, cfg.family_size) {
        let u0 = d.sample(grid.clone())?;
        let c = build_v0_auto(&u0, &h, cfg.delta / 100.0, 0.5)?;
        post.push(v0_postconditions(&u0, &h, &c.v0, c.gamma));
        let slack = c.truncated_mass + cfg.delta / 100.0 - c.excess_mass;
        worst_slack = worst_slack.min(slack);
        budget_ok &= slack >= 0.0;
    }
    let all_pass = post.iter().all(|r| r.pass);
    let mut w = worst(&post).expect("non-empty family");
    w.pass = all_pass;
    Ok(vec![
        w,
        CheckReport::verdict("v0_mass_budget", worst_slack, 0.0, worst_slack, budget_ok)
            .with_grid(cfg.grid_note())
            .with_notes("min of |(u0-h)+|_1 + delta/100 - |v0-h|_1 after mu shrinking"),
    ])
}

/// Radial node count resolving the scaled cigar core `√μ` with a few nodes.
fn cigar_resolution(n: usize, mu_min: f64) -> usize {
    let needed = (4.0 / mu_min.sqrt()).ceil() as usize;
    n.max(needed.next_power_of_two()).min(8192)
}

fn cigar_family_audits(
    cfg: &ExperimentConfig,
    audit: impl Fn(&crate::ConformalField) -> Result<super::theorems::AuditOutcome> + Sync,
) -> Result<Vec<super::theorems::AuditOutcome>> {
    let mu_min = cfg.mu.iter().cloned().fold(1.0, f64::min);
    let grid = radial_grid(cigar_resolution(cfg.n, mu_min), cfg.eps)?;
    cfg.mu
        .par_iter()
        .map(|&mu| {
            let u0 = ExactSolution::cigar_scaled(mu)?.sample(grid.clone(), 0.0)?;
            let mut o = audit(&u0)?;
            o.report.name = format!("{}_mu{mu:e}", o.report.name);
            Ok(o)
        })
        .collect()
}

fn check_theorem_1_1(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let sc = cfg.solver();
    let outs = cigar_family_audits(cfg, |u0| audit_theorem_1_1(u0, cfg.k, cfg.delta, &sc, None))?;
    let cs: Vec<f64> = outs.iter().map(|o| o.empirical_c).collect();
    let mut reports: Vec<CheckReport> = outs.into_iter().map(|o| o.report).collect();
    reports.push(uniformity_report("theorem_1_1_uniformity", &cs, 3.0));
    Ok(reports)
}

fn check_theorem_1_3(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let sc = cfg.solver();
    let outs = cigar_family_audits(cfg, |u0| audit_theorem_1_3(u0, cfg.alpha, cfg.delta, &sc))?;
    let cs: Vec<f64> = outs.iter().map(|o| o.empirical_c).collect();
    let mut reports: Vec<CheckReport> = outs.into_iter().map(|o| o.report).collect();
    reports.push(uniformity_report("theorem_1_3_uniformity", &cs, 3.0));
    Ok(reports)
}

fn check_theorem_4_1(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let grid = radial_grid(cfg.n, cfg.eps)?;
    let sc = cfg.solver();
    let members = generic_family(cfg.seed, cfg.family_size.min(4));
    let nested = members
        .par_iter()
        .map(|d| {
            let u0 = d.sample(grid.clone())?;
            let full = u0.lp_norm(1.0, Region::Full)?;
            let t_full = full * (1.0 + cfg.delta) / (4.0 * std::f64::consts::PI);
            // Alternate between the bisection branch and the k = 0 branch;
            // members whose full waiting time is past the horizon stay on
            // the bisection branch.
            let t = if d.index % 2 == 1 && 1.2 * t_full <= sc.horizon {
                1.2 * t_full
            } else {
                0.5 * t_full.min(sc.horizon)
            };
            let mut rs = audit_theorem_4_1(&u0, cfg.p, cfg.delta, t, &sc)?;
            for r in &mut rs {
                r.name = format!("{}_member{}", r.name, d.index);
            }
            Ok(rs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Largest relative gap between `λ u(x, t/λ)` from the unscaled run and the
/// run of the rescaled problem, at matched output times.
pub fn rescaling_gap(mu: f64, lambda: f64, n: usize, eps: f64, dt: f64, t_end: f64, tol: f64) -> Result<f64> {
    let grid = radial_grid(n, eps)?;
    let sol = ExactSolution::cigar_scaled(mu)?;
    let base = FlowProblem::new(sol.sample(grid.clone(), 0.0)?, BoundaryStrategy::ExactTrace(sol.clone()), t_end, dt)
        .with_newton_tol(tol);
    let scaled_sol = ExactSolution::rescaled(sol.clone(), lambda)?;
    let scaled = FlowProblem::new(
        scaled_sol.sample(grid, 0.0)?,
        BoundaryStrategy::ExactTrace(scaled_sol),
        lambda * t_end,
        lambda * dt,
    )
    .with_newton_tol(tol);
    let a = solver::solve(&base)?.into_result()?;
    let b = solver::solve(&scaled)?.into_result()?;
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Internal("rescaled run produced a different number of snapshots".into()));
    }
    let mut gap = 0.0f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        for (u, w) in x.values().iter().zip(y.values()) {
            gap = gap.max((lambda * u / w - 1.0).abs());
        }
    }
    Ok(gap)
}

/// Relative changes of `sup u/h` and `∫(u/h − α)₊ h dA` under a Möbius
/// pullback of the scaled cigar at `t = 0`, both sampled on one disk grid.
pub fn mobius_gaps(n: usize, eps: f64, mu: f64, alpha: f64, map: &MobiusMap) -> Result<(f64, f64)> {
    let grid = Arc::new(Grid::Disk(DiskGrid::new(n, eps)?));
    let sol = ExactSolution::cigar_scaled(mu)?;
    let u = sol.sample(grid.clone(), 0.0)?;
    let pulled = pullback_closed_form(grid.clone(), 0.0, map, |q| sol.eval(q, 0.0))?;
    let h = h_samples(&grid);
    let barrier: Vec<f64> = h.iter().map(|h| alpha * h).collect();
    let stats = |f: &crate::ConformalField| -> Result<(f64, f64)> {
        let ratio: Vec<f64> = f.values().iter().zip(&h).map(|(v, h)| v / h).collect();
        let sup = crate::discretization::sup_region(&grid, &ratio, Region::Full)?;
        let mass = truncated_l1(&grid, f.values(), Barrier::Samples(&barrier), Region::Full)?;
        Ok((sup, mass))
    };
    let (s0, m0) = stats(&u)?;
    let (s1, m1) = stats(&pulled)?;
    Ok(((s1 / s0 - 1.0).abs(), (m1 / m0 - 1.0).abs()))
}

/// The disk automorphism used by the invariance checks.
pub fn sample_mobius() -> MobiusMap {
    MobiusMap::new(Complex64::new(0.3, -0.2), 0.7).expect("|a| < 1")
}

fn check_invariance(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.newton_tol;
    let mut out = Vec::new();
    for lambda in [0.5, 2.0] {
        let gap = rescaling_gap(0.1, lambda, cfg.n, cfg.eps, cfg.dt, 0.2, tol)?;
        out.push(
            CheckReport::upper_bound(format!("rescaling_lambda{lambda}"), gap, 2.0 * tol, 0.0)
                .with_grid(cfg.grid_note())
                .with_dt(cfg.dt)
                .with_eps(cfg.eps)
                .with_notes("max relative gap between lambda*u(t/lambda) and the rescaled run"),
        );
    }
    let disk_eps = cfg.eps.max(4.0 / cfg.n as f64);
    let (sup_gap, mass_gap) = mobius_gaps(cfg.n, disk_eps, 0.5, cfg.alpha.max(1.0), &sample_mobius())?;
    let grid = format!("disk(n={}, eps={disk_eps})", cfg.n);
    out.push(
        CheckReport::upper_bound("mobius_sup_ratio", sup_gap, 1e-3, 0.0)
            .with_grid(grid.clone())
            .with_notes("relative change of sup u/h under pullback"),
    );
    out.push(
        CheckReport::upper_bound("mobius_truncated_mass", mass_gap, 1e-3, 0.0)
            .with_grid(grid)
            .with_notes("relative change of int (u/h - alpha)+ h dA under pullback"),
    );
    Ok(out)
}
