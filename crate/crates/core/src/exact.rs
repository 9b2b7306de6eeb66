//! Closed-form solutions of `∂t u = Δ log u`, used as oracles for the solver
//! and as the substrate of the sharpness experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::discretization::{ConformalField, Grid};
use crate::error::{Error, Result};
use crate::geometry::{DiskPoint, HyperbolicMetric, MobiusMap};

#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    /// `1/(e^{4t} + r²)`.
    CigarUnscaled,
    /// The cigar rescaled to carry mass 4π on the unit disk at `t = 0`,
    /// collapsing at `t = 1` as `μ → 0`.
    CigarScaled { mu: f64 },
    /// `(2t + α) h_ρ`, defined on `B_ρ`.
    Hyperbolic { alpha: f64, rho: f64 },
    /// `(u ∘ φ)|φ′|²` for a disk-domain base solution.
    MobiusPullback {
        base: Box<ExactSolution>,
        map: MobiusMap,
    },
    /// Parabolic rescaling `λ u(x, t/λ)`.
    Rescaled {
        base: Box<ExactSolution>,
        lambda: f64,
    },
}

/// `(ln c, L)` of the scaled cigar `4/(L (c + r²))`, with
/// `c = (1+μ)^t μ^{1−t}` kept in log form so tiny `μ` cannot underflow.
fn cigar_params(mu: f64, t: f64) -> (f64, f64) {
    let log_c = t * mu.ln_1p() + (1.0 - t) * mu.ln();
    (log_c, (1.0 / mu).ln_1p())
}

impl ExactSolution {
    pub fn cigar_scaled(mu: f64) -> Result<Self> {
        let s = ExactSolution::CigarScaled { mu };
        s.validate()?;
        Ok(s)
    }

    pub fn hyperbolic(alpha: f64, rho: f64) -> Result<Self> {
        let s = ExactSolution::Hyperbolic { alpha, rho };
        s.validate()?;
        Ok(s)
    }

    pub fn pullback(base: ExactSolution, map: MobiusMap) -> Result<Self> {
        let s = ExactSolution::MobiusPullback {
            base: Box::new(base),
            map,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn rescaled(base: ExactSolution, lambda: f64) -> Result<Self> {
        let s = ExactSolution::Rescaled {
            base: Box::new(base),
            lambda,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExactSolution::CigarUnscaled => Ok(()),
            ExactSolution::CigarScaled { mu } => {
                if *mu > 0.0 && mu.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!("cigar scale mu must be > 0, got {mu}")))
                }
            }
            ExactSolution::Hyperbolic { alpha, rho } => {
                if !(*alpha >= 0.0 && alpha.is_finite()) {
                    Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")))
                } else if !(*rho > 0.0 && *rho <= 1.0) {
                    Err(Error::InvalidInput(format!("rho must lie in (0, 1], got {rho}")))
                } else {
                    Ok(())
                }
            }
            ExactSolution::MobiusPullback { base, .. } => {
                base.validate()?;
                if base.domain_radius() < 1.0 {
                    Err(Error::InvalidInput(
                        "Möbius pullback needs a solution on the whole disk".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            ExactSolution::Rescaled { base, lambda } => {
                base.validate()?;
                if *lambda > 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!("rescaling factor must be > 0, got {lambda}")))
                }
            }
        }
    }

    /// Radius of the ball on which the solution lives.
    pub fn domain_radius(&self) -> f64 {
        match self {
            ExactSolution::Hyperbolic { rho, .. } => *rho,
            ExactSolution::Rescaled { base, .. } => base.domain_radius(),
            _ => 1.0,
        }
    }

    /// Whether the solution depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match self {
            ExactSolution::MobiusPullback { base, map } => {
                map.a().norm() == 0.0 && base.is_radial()
            }
            ExactSolution::Rescaled { base, .. } => base.is_radial(),
            _ => true,
        }
    }

    pub fn eval(&self, p: DiskPoint, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("time {t} is not finite")));
        }
        match self {
            ExactSolution::CigarUnscaled => Ok(1.0 / ((4.0 * t).exp() + p.radius_sq())),
            ExactSolution::CigarScaled { mu } => {
                let (log_c, big_l) = cigar_params(*mu, t);
                Ok(4.0 / (big_l * (log_c.exp() + p.radius_sq())))
            }
            ExactSolution::Hyperbolic { alpha, rho } => {
                let scale = 2.0 * t + alpha;
                if !(scale > 0.0) {
                    return Err(Error::Domain(format!(
                        "(2t + alpha) must be positive, got {scale} at t={t}"
                    )));
                }
                let metric = if *rho < 1.0 {
                    HyperbolicMetric::SubBall(*rho)
                } else {
                    HyperbolicMetric::FullDisk
                };
                Ok(scale * metric.eval(p)?)
            }
            ExactSolution::MobiusPullback { base, map } => {
                let (q, k) = map.apply(p);
                Ok(base.eval(q, t)? * k)
            }
            ExactSolution::Rescaled { base, lambda } => Ok(lambda * base.eval(p, t / lambda)?),
        }
    }

    pub fn eval_xy(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.eval(DiskPoint::new(x, y)?, t)
    }

    /// Samples the solution at every node of `grid`.
    pub fn sample(&self, grid: Arc<Grid>, t: f64) -> Result<ConformalField> {
        ConformalField::try_from_fn(grid, t, |x, y| self.eval_xy(x, y, t))
    }

    /// Analytic Gauss curvature `−Δ log u/(2u)`.
    pub fn curvature(&self, p: DiskPoint, t: f64) -> Result<f64> {
        match self {
            ExactSolution::CigarUnscaled => {
                let c = (4.0 * t).exp();
                Ok(2.0 * c / (c + p.radius_sq()))
            }
            ExactSolution::CigarScaled { mu } => {
                let (log_c, big_l) = cigar_params(*mu, t);
                let c = log_c.exp();
                Ok(2.0 * c / ((4.0 / big_l) * (c + p.radius_sq())))
            }
            ExactSolution::Hyperbolic { alpha, .. } => Ok(-1.0 / (2.0 * t + alpha)),
            ExactSolution::MobiusPullback { base, map } => base.curvature(map.apply(p).0, t),
            ExactSolution::Rescaled { base, lambda } => Ok(base.curvature(p, t / lambda)? / lambda),
        }
    }
}

/// `∫_{B_r} u dA` for the scaled cigar: `4π log((c + r²)/c) / log(1/μ + 1)`.
pub fn cigar_l1_mass(mu: f64, t: f64, r: f64) -> Result<f64> {
    if !(mu > 0.0) || !(t >= 0.0) || !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "cigar mass needs mu > 0, t >= 0, 0 < r <= 1; got mu={mu}, t={t}, r={r}"
        )));
    }
    let (log_c, big_l) = cigar_params(mu, t);
    let ratio = (2.0 * r.ln() - log_c).exp();
    Ok(4.0 * PI * ratio.ln_1p() / big_l)
}

/// Discrete residual `|δt u − Δ_h log u|` at the interior nodes, with a
/// centred time difference over `[t − dt, t + dt]`.
pub fn residual(sol: &ExactSolution, grid: &Arc<Grid>, t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let before = sol.sample(grid.clone(), t - dt)?;
    let now = sol.sample(grid.clone(), t)?;
    let after = sol.sample(grid.clone(), t + dt)?;
    let lap = now.laplacian_of_log();
    Ok(lap
        .iter()
        .enumerate()
        .map(|(i, l)| ((after.values()[i] - before.values()[i]) / (2.0 * dt) - l).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn trivial_values() {
        let o = DiskPoint::origin();
        assert_eq!(ExactSolution::CigarUnscaled.eval(o, 0.0).unwrap(), 1.0);
        let h = ExactSolution::hyperbolic(1.0, 1.0).unwrap();
        assert_eq!(h.eval(o, 0.0).unwrap(), 4.0);
    }

    #[test]
    fn scaled_cigar_pre_critical_formula() {
        let mu: f64 = 1e-3;
        let delta = 0.2;
        let u = ExactSolution::cigar_scaled(mu).unwrap();
        let got = u.eval(DiskPoint::origin(), 1.0 - delta).unwrap();
        let want = 4.0
            / ((1.0 / mu + 1.0).ln() * (1.0 + mu).powf(1.0 - delta) * mu.powf(delta));
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn tiny_mu_does_not_underflow() {
        let u = ExactSolution::cigar_scaled(1e-300).unwrap();
        let v = u.eval(DiskPoint::origin(), 0.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn unit_mass_at_time_zero() {
        for mu in [1e-8, 1e-3, 0.5, 10.0] {
            let m = cigar_l1_mass(mu, 0.0, 1.0).unwrap();
            assert!((m - 4.0 * PI).abs() < 1e-12 * 4.0 * PI, "mu={mu}: {m}");
        }
    }

    #[test]
    fn pullback_rejects_sub_ball_base() {
        let m = MobiusMap::new(Complex64::new(0.2, 0.1), 0.3).unwrap();
        assert!(ExactSolution::pullback(ExactSolution::hyperbolic(1.0, 0.5).unwrap(), m).is_err());
    }

    #[test]
    fn hyperbolic_pullback_is_invariant() {
        let m = MobiusMap::new(Complex64::new(-0.4, 0.3), 1.1).unwrap();
        let base = ExactSolution::hyperbolic(1.0, 1.0).unwrap();
        let pb = ExactSolution::pullback(base.clone(), m).unwrap();
        for (x, y) in [(0.0, 0.0), (0.3, 0.5), (-0.7, 0.1)] {
            let a = pb.eval_xy(x, y, 0.4).unwrap();
            let b = base.eval_xy(x, y, 0.4).unwrap();
            assert!((a - b).abs() < 1e-12 * b);
        }
    }
}
