//! The potential `ψ` with `Δψ(t) = v(t) − (2t+1)h`, the function
//! `φ = ψ + (t + ½) log((2t+1)h)`, the Harnack quantity `H`, the pointwise
//! bounds it implies and the exponential-integrability audit.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::discretization::{integrate, Grid, Region};
use crate::error::{Error, Result};
use crate::geometry;
use crate::report::CheckReport;
use crate::solver::Trajectory;

/// `exp` arguments above this are reported as unbounded rather than summed.
pub const EXP_GUARD: f64 = 700.0;

/// `h` sampled at every node of `grid`.
pub fn h_samples(grid: &Grid) -> Vec<f64> {
    (0..grid.len()).map(|i| geometry::h(grid.radius(i))).collect()
}

/// Solves `Δψ = f` with zero boundary trace. `f` may be given on the
/// interior nodes or on all nodes (boundary samples are then ignored).
pub fn poisson_zero_dirichlet(grid: &Grid, f: &[f64]) -> Result<Vec<f64>> {
    let m = grid.n_interior();
    if f.len() != m && f.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "source has {} samples, grid has {} interior nodes",
            f.len(),
            m
        )));
    }
    grid.poisson(&f[..m], &vec![0.0; grid.len() - m])
}

/// Rule for `ψ(t) = ψ(0) + ∫_0^t log(v/((2s+1)h)) ds` over the snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiAccumulation {
    /// Right-endpoint rule. Matches backward-Euler stepping, so that
    /// `Δ_h ψ(t) = v(t) − (2t+1)h` holds exactly on the grid when every
    /// step is recorded.
    #[default]
    Implicit,
    /// Trapezoid rule in time.
    Trapezoid,
}

/// `ψ` and `φ` at every snapshot of a trajectory.
#[derive(Debug, Clone)]
pub struct PotentialState {
    grid: Arc<Grid>,
    pub times: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub accumulation: PsiAccumulation,
}

impl PotentialState {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn psi0(&self) -> &[f64] {
        &self.psi[0]
    }

    /// `max_n ‖Δ_h ψ_n − (v_n − (2t_n+1)h)‖_∞` over the interior nodes.
    pub fn poisson_consistency(&self, traj: &Trajectory) -> Result<f64> {
        let h = h_samples(&self.grid);
        let mut worst = 0.0f64;
        for (psi, snap) in self.psi.iter().zip(&traj.snapshots) {
            let t = snap.time();
            let lap = self.grid.laplacian(psi)?;
            for (i, l) in lap.iter().enumerate() {
                worst = worst.max((l - (snap.values()[i] - (2.0 * t + 1.0) * h[i])).abs());
            }
        }
        Ok(worst)
    }

    /// Largest `|∂t ψ|` over boundary nodes and snapshots `t > 0`.
    pub fn rim_time_derivative(&self) -> f64 {
        let m = self.grid.n_interior();
        let mut worst = 0.0f64;
        for n in 1..self.psi.len() {
            let dt = self.times[n] - self.times[n - 1];
            for i in m..self.grid.len() {
                worst = worst.max(((self.psi[n][i] - self.psi[n - 1][i]) / dt).abs());
            }
        }
        worst
    }
}

/// `log(v/((2t+1)h))` at every node.
fn log_ratio(v: &[f64], h: &[f64], t: f64) -> Vec<f64> {
    v.iter()
        .zip(h)
        .map(|(v, h)| (v / ((2.0 * t + 1.0) * h)).ln())
        .collect()
}

/// Builds `ψ(0)` from the first snapshot and accumulates `ψ(t)` and `φ(t)`
/// along the trajectory.
pub fn evolve_psi(traj: &Trajectory, rule: PsiAccumulation) -> Result<PotentialState> {
    let grid = traj.grid().clone();
    let h = h_samples(&grid);
    let v0 = traj.snapshots[0].values();
    let t0 = traj.snapshots[0].time();
    if t0 != 0.0 {
        return Err(Error::InvalidInput(format!(
            "potential needs a trajectory starting at t = 0, got {t0}"
        )));
    }
    let source: Vec<f64> = v0.iter().zip(&h).map(|(v, h)| v - h).collect();
    let psi0 = poisson_zero_dirichlet(&grid, &source)?;
    evolve_psi_from(psi0, traj, rule)
}

/// As [`evolve_psi`], with `ψ(0)` supplied by the caller.
pub fn evolve_psi_from(
    psi0: Vec<f64>,
    traj: &Trajectory,
    rule: PsiAccumulation,
) -> Result<PotentialState> {
    let grid = traj.grid().clone();
    grid.check_len(psi0.len())?;
    let h = h_samples(&grid);
    let times = traj.times();
    let mut psi = Vec::with_capacity(times.len());
    let mut g_prev = log_ratio(traj.snapshots[0].values(), &h, times[0]);
    psi.push(psi0);
    for n in 1..times.len() {
        let dt = times[n] - times[n - 1];
        let g = log_ratio(traj.snapshots[n].values(), &h, times[n]);
        let next: Vec<f64> = psi[n - 1]
            .iter()
            .enumerate()
            .map(|(i, p)| match rule {
                PsiAccumulation::Implicit => p + dt * g[i],
                PsiAccumulation::Trapezoid => p + 0.5 * dt * (g[i] + g_prev[i]),
            })
            .collect();
        psi.push(next);
        g_prev = g;
    }
    let phi = psi
        .iter()
        .zip(&times)
        .map(|(p, t)| {
            p.iter()
                .zip(&h)
                .map(|(p, h)| p + (t + 0.5) * ((2.0 * t + 1.0) * h).ln())
                .collect()
        })
        .collect();
    Ok(PotentialState {
        grid,
        times,
        psi,
        phi,
        accumulation: rule,
    })
}

/// Which expression of the Harnack quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnackForm {
    /// `t log Δφ − (φ(t) − φ(0))` with the discrete Laplacian of `φ`;
    /// boundary nodes use `Δφ = v`.
    PotentialForm,
    /// `t log(v/((2t+1)h)) − (ψ(t) − ψ(0)) − ½ log(2t+1)`.
    VForm,
}

#[derive(Debug, Clone)]
pub struct HarnackField {
    pub form: HarnackForm,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl HarnackField {
    /// Largest value over all nodes at times `t > 0`.
    pub fn max_positive_time(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t > 0.0)
            .flat_map(|(_, v)| v.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest deviation of the boundary values from `½ log(1/(2t+1))`.
    pub fn rim_deviation(&self, grid: &Grid) -> f64 {
        let m = grid.n_interior();
        self.times
            .iter()
            .zip(&self.values)
            .flat_map(|(t, v)| {
                let target = -0.5 * (2.0 * t + 1.0).ln();
                v[m..].iter().map(move |x| (x - target).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn max_difference(&self, other: &HarnackField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn harnack(traj: &Trajectory, state: &PotentialState, form: HarnackForm) -> Result<HarnackField> {
    if state.times.len() != traj.snapshots.len() {
        return Err(Error::InvalidInput("potential and trajectory lengths differ".into()));
    }
    let grid = traj.grid();
    let h = h_samples(grid);
    let m = grid.n_interior();
    let mut values = Vec::with_capacity(state.times.len());
    for (n, snap) in traj.snapshots.iter().enumerate() {
        let t = state.times[n];
        let v = snap.values();
        let row: Vec<f64> = match form {
            HarnackForm::VForm => (0..grid.len())
                .map(|i| {
                    t * (v[i] / ((2.0 * t + 1.0) * h[i])).ln() - (state.psi[n][i] - state.psi[0][i])
                        - 0.5 * (2.0 * t + 1.0).ln()
                })
                .collect(),
            HarnackForm::PotentialForm => {
                let lap = grid.laplacian(&state.phi[n])?;
                (0..grid.len())
                    .map(|i| {
                        let d = if i < m { lap[i] } else { v[i] };
                        if !(d > 0.0) {
                            return Err(Error::Domain(format!(
                                "Δφ = {d} is not positive at node {i}, t = {t}"
                            )));
                        }
                        let log_d = if t == 0.0 { 0.0 } else { t * d.ln() };
                        Ok(log_d - (state.phi[n][i] - state.phi[0][i]))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        values.push(row);
    }
    Ok(HarnackField {
        form,
        times: state.times.clone(),
        values,
    })
}

/// `∂tH − Δ_h H/v + v₀/v` at the interior nodes of every inner snapshot
/// (centred in time, so the first and last snapshots are skipped).
/// Returns `(t_n, residual field)` pairs.
pub fn harnack_residual(field: &HarnackField, traj: &Trajectory) -> Result<Vec<(f64, Vec<f64>)>> {
    if field.values.len() < 3 {
        return Err(Error::InvalidInput("centred differences need at least 3 snapshots".into()));
    }
    let grid = traj.grid();
    let m = grid.n_interior();
    let v0 = traj.snapshots[0].values();
    let mut out = Vec::with_capacity(field.values.len() - 2);
    for n in 1..field.values.len() - 1 {
        let span = field.times[n + 1] - field.times[n - 1];
        let lap = grid.laplacian(&field.values[n])?;
        let v = traj.snapshots[n].values();
        let r = (0..m)
            .map(|i| {
                (field.values[n + 1][i] - field.values[n - 1][i]) / span - lap[i] / v[i]
                    + v0[i] / v[i]
            })
            .collect();
        out.push((field.times[n], r));
    }
    Ok(out)
}

/// `∂tφ − log Δφ − 1` at interior nodes of inner snapshots, centred in time.
pub fn phi_identity_residual(state: &PotentialState) -> Result<Vec<(f64, Vec<f64>)>> {
    let grid = &state.grid;
    let m = grid.n_interior();
    let mut out = Vec::new();
    for n in 1..state.phi.len().saturating_sub(1) {
        let span = state.times[n + 1] - state.times[n - 1];
        let lap = grid.laplacian(&state.phi[n])?;
        let r = (0..m)
            .map(|i| {
                (state.phi[n + 1][i] - state.phi[n - 1][i]) / span - lap[i].max(f64::MIN_POSITIVE).ln()
                    - 1.0
            })
            .collect();
        out.push((state.times[n], r));
    }
    Ok(out)
}

/// Max-norm of a family of fields.
pub fn max_abs(fields: &[(f64, Vec<f64>)]) -> f64 {
    fields
        .iter()
        .flat_map(|(_, f)| f.iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
}

/// The two pointwise bounds on `v/((2t+1)h)` and their ordering, audited in
/// log form at every node and snapshot with `t > 0`:
///
/// * weak: `log ratio ≤ 1 − ψ(0)/t`
/// * strong: `log ratio ≤ log(1+2t)/(2t) + (ψ(t) − ψ(0))/t`
/// * ordering: strong right side ≤ weak right side.
#[derive(Debug, Clone)]
pub struct CorollaryAudit {
    pub weak: CheckReport,
    pub strong: CheckReport,
    pub ordering: CheckReport,
}

impl CorollaryAudit {
    pub fn reports(&self) -> Vec<CheckReport> {
        vec![self.weak.clone(), self.strong.clone(), self.ordering.clone()]
    }

    pub fn pass(&self) -> bool {
        self.weak.pass && self.strong.pass && self.ordering.pass
    }
}

/// Rounding allowance for the ordering of the two right sides, which differ
/// by exactly zero where `ψ(t) = 0`.
const ORDERING_ROUNDING: f64 = 1e-12;

pub fn corollary_bounds(traj: &Trajectory, state: &PotentialState, tolerance: f64) -> Result<CorollaryAudit> {
    let grid = traj.grid();
    let h = h_samples(grid);
    let mut weak = (f64::INFINITY, 0.0, 0.0);
    let mut strong = (f64::INFINITY, 0.0, 0.0);
    let mut order = (f64::INFINITY, 0.0, 0.0);
    for (n, snap) in traj.snapshots.iter().enumerate() {
        let t = snap.time();
        if t <= 0.0 {
            continue;
        }
        let g = log_ratio(snap.values(), &h, t);
        let growth = (2.0 * t).ln_1p() / (2.0 * t);
        for (i, &gi) in g.iter().enumerate() {
            let p0 = state.psi[0][i];
            let pt = state.psi[n][i];
            let rhs_weak = 1.0 - p0 / t;
            let rhs_strong = growth + (pt - p0) / t;
            if rhs_weak - gi < weak.0 {
                weak = (rhs_weak - gi, gi, rhs_weak);
            }
            if rhs_strong - gi < strong.0 {
                strong = (rhs_strong - gi, gi, rhs_strong);
            }
            if rhs_weak - rhs_strong < order.0 {
                order = (rhs_weak - rhs_strong, rhs_strong, rhs_weak);
            }
        }
    }
    let describe = |r: CheckReport| {
        r.with_grid(grid.describe())
            .with_dt(traj.dt)
            .with_eps(grid.eps())
    };
    let make = |name: &str, (margin, lhs, rhs): (f64, f64, f64), tol: f64, note: &str| {
        describe(
            CheckReport::verdict(name, lhs, rhs, margin, margin >= -tol)
                .with_tolerance(tol)
                .with_notes(note),
        )
    };
    Ok(CorollaryAudit {
        weak: make(
            "corollary_weak",
            weak,
            tolerance,
            "log(v/((2t+1)h)) <= 1 - psi(0)/t",
        ),
        strong: make(
            "corollary_strong",
            strong,
            tolerance,
            "log(v/((2t+1)h)) <= log(1+2t)/(2t) + (psi(t)-psi(0))/t",
        ),
        ordering: make(
            "corollary_ordering",
            order,
            ORDERING_ROUNDING,
            "strong right side <= weak right side",
        ),
    })
}

/// Exponential integrability audit for `Δη = f` with zero trace:
/// `∫_B e^{p|η|} ≤ 16π² / (4π − p‖f‖₁)` whenever `p‖f‖₁ < 4π`.
///
/// `f` is sampled on the interior nodes or on all nodes. The rim annulus
/// outside the grid, where `η` vanishes at the trace, contributes its area.
pub fn brezis_merle_audit(grid: &Grid, eta: &[f64], f: &[f64], p: f64) -> Result<CheckReport> {
    grid.check_len(eta.len())?;
    let m = grid.n_interior();
    let f_full: Vec<f64> = if f.len() == grid.len() {
        f.to_vec()
    } else if f.len() == m {
        let mut v = f.to_vec();
        v.resize(grid.len(), 0.0);
        v
    } else {
        return Err(Error::InvalidInput("source length does not match the grid".into()));
    };
    let abs_f: Vec<f64> = f_full.iter().map(|v| v.abs()).collect();
    let norm_f = integrate(grid, &abs_f, Region::Full)?;
    let window = if norm_f > 0.0 { 4.0 * PI / norm_f } else { f64::INFINITY };
    let base = CheckReport::verdict("brezis_merle", f64::NAN, f64::NAN, f64::NAN, true)
        .with_grid(grid.describe())
        .with_eps(grid.eps());
    if !(p > 0.0) || p * norm_f >= 4.0 * PI {
        return Ok(base.with_notes(format!(
            "inapplicable: p={p} outside the window 0 < p < 4pi/|f|_1 = {window:.6}"
        )));
    }
    let rhs = 16.0 * PI * PI / (4.0 * PI - p * norm_f);
    let top = eta.iter().map(|e| p * e.abs()).fold(0.0, f64::max);
    if top > EXP_GUARD {
        return Ok(CheckReport::verdict("brezis_merle", f64::INFINITY, rhs, f64::NEG_INFINITY, false)
            .with_grid(grid.describe())
            .with_eps(grid.eps())
            .with_notes(format!("unbounded at this resolution: max p|eta| = {top:.3e}")));
    }
    let w = grid.weights(Region::Full);
    let covered: f64 = w.iter().sum();
    let lhs = w
        .iter()
        .zip(eta)
        .map(|(w, e)| w * (p * e.abs()).exp())
        .sum::<f64>()
        + (PI - covered).max(0.0);
    Ok(CheckReport::upper_bound("brezis_merle", lhs, rhs, 0.0)
        .with_grid(grid.describe())
        .with_eps(grid.eps())
        .with_notes(format!(
            "|f|_1={norm_f:.6e}, p={p}, window 0 < p < {window:.6}"
        )))
}
