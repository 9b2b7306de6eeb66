//! Closed-form experiments on the scaled cigar: blow-up before the critical
//! time, boundedness after it and concentration of mass.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::exact::{cigar_l1_mass, ExactSolution};
use crate::geometry::DiskPoint;
use crate::report::CheckReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub t: f64,
    pub value: f64,
}

/// Writes `mu,t,value` rows at full precision.
pub fn write_sweep_csv(rows: &[SweepRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "mu,t,value")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r.mu, r.t, r.value)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SharpnessSweep {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<CheckReport>,
}

/// `u(0, t)` of the scaled cigar.
pub fn cigar_center(mu: f64, t: f64) -> Result<f64> {
    ExactSolution::cigar_scaled(mu)?.eval(DiskPoint::origin(), t)
}

/// Growth factor of `u(0, 1 − δ)` from `μ_a` to `μ_b` predicted by the
/// closed form: `(μ_a/μ_b)^δ · L_a/L_b · ((1+μ_a)/(1+μ_b))^{1−δ}` with
/// `L = log(1/μ + 1)`.
pub fn predicted_growth(mu_a: f64, mu_b: f64, delta: f64) -> f64 {
    let l = |mu: f64| (1.0 / mu).ln_1p();
    (mu_a / mu_b).powf(delta) * l(mu_a) / l(mu_b) * ((1.0 + mu_a) / (1.0 + mu_b)).powf(1.0 - delta)
}

/// Tabulates `u(0, 1 ± δ)` over decreasing `μ` and audits the trends:
/// growth of at least `growth_per_decade` per decade of `μ` before the
/// critical time, strict decrease (below the first value) after it, and the
/// mass `4π` at `t = 0`.
pub fn sharpness_sweep(mus: &[f64], delta: f64, growth_per_decade: f64) -> Result<SharpnessSweep> {
    if mus.len() < 2 || mus.windows(2).any(|w| !(w[1] < w[0])) || mus.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidInput("mu values must be positive and strictly decreasing".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    let (t_pre, t_post) = (1.0 - delta, 1.0 + delta);
    let pre = mus.iter().map(|&m| cigar_center(m, t_pre)).collect::<Result<Vec<_>>>()?;
    let post = mus.iter().map(|&m| cigar_center(m, t_post)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(2 * mus.len());
    for (i, &mu) in mus.iter().enumerate() {
        rows.push(SweepRow { mu, t: t_pre, value: pre[i] });
        rows.push(SweepRow { mu, t: t_post, value: post[i] });
    }

    let mut min_rate = f64::INFINITY;
    let mut predicted = Vec::new();
    for i in 1..mus.len() {
        let decades = (mus[i - 1] / mus[i]).log10();
        let rate = (pre[i] / pre[i - 1]).powf(1.0 / decades);
        min_rate = min_rate.min(rate);
        predicted.push(predicted_growth(mus[i - 1], mus[i], delta).powf(1.0 / decades));
    }
    let growth = CheckReport::verdict(
        "sharpness_pre_growth",
        min_rate,
        growth_per_decade,
        min_rate - growth_per_decade,
        min_rate >= growth_per_decade,
    )
    .with_notes(format!(
        "t={t_pre}; lhs = smallest growth of u(0,t) per mu decade; closed-form per-decade factors {:?}; values {:?}",
        predicted.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>(),
        pre.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>()
    ));

    let min_step_pre = pre.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let increasing = CheckReport::verdict(
        "sharpness_pre_increasing",
        min_step_pre,
        0.0,
        min_step_pre,
        min_step_pre > 0.0,
    )
    .with_notes(format!("t={t_pre}; lhs = smallest successive increase"));

    let max_step_post = post.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let below_first = post[1..].iter().all(|v| *v < post[0]);
    let decreasing = CheckReport::verdict(
        "sharpness_post_decreasing",
        max_step_post,
        0.0,
        -max_step_post,
        max_step_post < 0.0 && below_first,
    )
    .with_notes(format!(
        "t={t_post}; lhs = largest successive change; values {:?}",
        post.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>()
    ));

    let mut worst_mass = 0.0f64;
    for &mu in mus {
        let m = cigar_l1_mass(mu, 0.0, 1.0)?;
        worst_mass = worst_mass.max((m / (4.0 * PI) - 1.0).abs());
    }
    let mass = CheckReport::upper_bound("sharpness_mass_t0", worst_mass, 1e-10, 0.0)
        .with_notes("relative deviation of the closed-form mass at t=0 from 4pi");

    Ok(SharpnessSweep {
        rows,
        reports: vec![growth, increasing, decreasing, mass],
    })
}

/// Relative error of the mass in `B_r` at time `t` against `4π(1 − t)`.
pub fn delta_mass_error(mu: f64, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidInput(format!("t must lie in (0, 1), got {t}")));
    }
    Ok((cigar_l1_mass(mu, t, r)? / (4.0 * PI * (1.0 - t)) - 1.0).abs())
}

/// Errors along decreasing `μ` must decrease strictly.
pub fn delta_mass_check(mus: &[f64], t: f64, r: f64) -> Result<(Vec<SweepRow>, CheckReport)> {
    let errs = mus.iter().map(|&m| delta_mass_error(m, t, r)).collect::<Result<Vec<_>>>()?;
    let rows = mus
        .iter()
        .zip(&errs)
        .map(|(&mu, &value)| SweepRow { mu, t, value })
        .collect();
    let max_step = errs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let report = CheckReport::verdict(
        "delta_mass",
        *errs.last().unwrap_or(&f64::NAN),
        errs[0],
        -max_step,
        mus.len() >= 2 && max_step < 0.0,
    )
    .with_notes(format!(
        "t={t}, r={r}; relative errors {:?}",
        errs.iter().map(|e| format!("{e:.6e}")).collect::<Vec<_>>()
    ));
    Ok((rows, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_growth_matches_values() {
        let (a, b, d) = (1e-2, 1e-4, 0.1);
        let ratio = cigar_center(b, 1.0 - d).unwrap() / cigar_center(a, 1.0 - d).unwrap();
        assert!((ratio - predicted_growth(a, b, d)).abs() < 1e-12 * ratio);
    }

    #[test]
    fn delta_mass_example() {
        let e6 = delta_mass_error(1e-6, 0.5, 0.5).unwrap();
        let e12 = delta_mass_error(1e-12, 0.5, 0.5).unwrap();
        assert!((e6 - 0.2).abs() < 0.01, "{e6}");
        assert!((e12 - 0.1).abs() < 0.01, "{e12}");
        assert!(e12 < e6);
    }

    #[test]
    fn rejects_unsorted_mu() {
        assert!(sharpness_sweep(&[1e-4, 1e-2], 0.1, 5.0).is_err());
    }
}
