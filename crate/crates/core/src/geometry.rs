//! Hyperbolic geometry of the unit disk: conformal factors of complete
//! metrics on the disk, sub-balls, annuli and the punctured disk, Möbius
//! automorphisms and Gauss curvature.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::discretization::{ConformalField, Grid};
use crate::error::{Error, Result};
use crate::report::CheckReport;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub x: f64,
    pub y: f64,
}

impl DiskPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = Self { x, y };
        if !(x.is_finite() && y.is_finite()) || p.radius_sq() >= 1.0 {
            return Err(Error::Domain(format!("({x}, {y}) is not in the open unit disk")));
        }
        Ok(p)
    }

    pub fn origin() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub fn radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Complete conformal metric of constant curvature −1 on a disk domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperbolicMetric {
    FullDisk,
    SubBall(f64),
    Annulus(f64),
    Punctured,
}

impl HyperbolicMetric {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HyperbolicMetric::SubBall(rho) if !(rho > 0.0 && rho < 1.0) => {
                Err(Error::InvalidInput(format!("sub-ball radius must lie in (0, 1), got {rho}")))
            }
            HyperbolicMetric::Annulus(a) if !(a > 0.0 && a < 1.0) => {
                Err(Error::InvalidInput(format!("annulus inner radius must lie in (0, 1), got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether `r` lies in the metric's (open) domain.
    pub fn contains(&self, r: f64) -> bool {
        match *self {
            HyperbolicMetric::FullDisk => (0.0..1.0).contains(&r),
            HyperbolicMetric::SubBall(rho) => r >= 0.0 && r < rho,
            HyperbolicMetric::Annulus(a) => r > a && r < 1.0,
            HyperbolicMetric::Punctured => r > 0.0 && r < 1.0,
        }
    }

    pub fn eval(&self, p: DiskPoint) -> Result<f64> {
        self.eval_radius(p.radius())
    }

    /// Conformal factor at radius `r`.
    pub fn eval_radius(&self, r: f64) -> Result<f64> {
        Ok(self.log_eval_radius(r)?.exp())
    }

    /// Logarithm of the conformal factor at radius `r`, computed without
    /// forming the factor itself.
    pub fn log_eval_radius(&self, r: f64) -> Result<f64> {
        self.validate()?;
        if !self.contains(r) {
            return Err(Error::Domain(format!("radius {r} outside the domain of {self:?}")));
        }
        Ok(match *self {
            HyperbolicMetric::FullDisk => log_h(r),
            HyperbolicMetric::SubBall(rho) => log_h(r / rho) - 2.0 * rho.ln(),
            HyperbolicMetric::Punctured => -2.0 * (r.ln() + (-r.ln()).ln()),
            HyperbolicMetric::Annulus(a) => {
                let big_l = -a.ln();
                let s = -r.ln() / big_l;
                // sin(πs) near s = 1 loses all digits unless taken as sin(π(1 − s)).
                let sin = if s <= 0.5 {
                    (PI * s).sin()
                } else {
                    (PI * ((r / a).ln() / big_l)).sin()
                };
                2.0 * (PI.ln() - big_l.ln() - r.ln() - sin.ln())
            }
        })
    }
}

/// `log h(r) = 2 log 2 − 2 log(1 − r²)`.
fn log_h(r: f64) -> f64 {
    2.0 * (2.0f64.ln() - ((1.0 - r) * (1.0 + r)).ln())
}

/// `h(r) = (2/(1 − r²))²` for `0 ≤ r < 1` (no domain check).
pub fn h(r: f64) -> f64 {
    let d = (1.0 - r) * (1.0 + r);
    4.0 / (d * d)
}

/// Asserts `h < h₀ < h_a` at every sample radius and reports the smallest
/// relative margins.
pub fn metric_ordering_check(a: f64, r_samples: &[f64]) -> Result<CheckReport> {
    let annulus = HyperbolicMetric::Annulus(a);
    annulus.validate()?;
    let mut min_low = f64::INFINITY;
    let mut min_high = f64::INFINITY;
    for &r in r_samples {
        let lh = HyperbolicMetric::FullDisk.log_eval_radius(r)?;
        let l0 = HyperbolicMetric::Punctured.log_eval_radius(r)?;
        let la = annulus.log_eval_radius(r)?;
        min_low = min_low.min(l0 - lh);
        min_high = min_high.min(la - l0);
    }
    let margin = min_low.min(min_high);
    Ok(CheckReport::verdict(
        "metric_ordering",
        min_low,
        min_high,
        margin,
        r_samples.is_empty() || margin > 0.0,
    )
    .with_notes(format!(
        "a={a}, {} samples; lhs=min log(h0/h), rhs=min log(ha/h0)",
        r_samples.len()
    )))
}

/// Disk automorphism `z ↦ e^{iθ}(z − a)/(1 − ā z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    theta: f64,
}

impl MobiusMap {
    pub fn new(a: Complex64, theta: f64) -> Result<Self> {
        if !(a.norm() < 1.0) || !theta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Möbius parameter must satisfy |a| < 1, got {a}"
            )));
        }
        Ok(Self { a, theta })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(0.0, 0.0),
            theta: 0.0,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Image of `p` and the conformal factor `|φ′(p)|²`.
    pub fn apply(&self, p: DiskPoint) -> (DiskPoint, f64) {
        let z = p.to_complex();
        let denom = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        let w = Complex64::from_polar(1.0, self.theta) * (z - self.a) / denom;
        let k = (1.0 - self.a.norm_sqr()) / denom.norm_sqr();
        // Rounding can push |w| to 1 for points hugging the rim.
        let scale = if w.norm() >= 1.0 {
            (1.0 - f64::EPSILON) / w.norm()
        } else {
            1.0
        };
        (
            DiskPoint {
                x: w.re * scale,
                y: w.im * scale,
            },
            k * k,
        )
    }

    pub fn apply_xy(&self, x: f64, y: f64) -> Result<(DiskPoint, f64)> {
        Ok(self.apply(DiskPoint::new(x, y)?))
    }
}

/// Pulls a sampled conformal factor back by `m`: `(u ∘ φ)·|φ′|²`, sampled on
/// the same grid by interpolation.
///
/// Radial grids only admit rotations, since a general pullback is not radial.
pub fn pullback_conformal(u: &ConformalField, m: &MobiusMap) -> Result<ConformalField> {
    if matches!(u.grid().as_ref(), Grid::Radial(_)) && m.a().norm() != 0.0 {
        return Err(Error::InvalidInput(
            "a Möbius pullback with a ≠ 0 is not radial; use a disk grid".into(),
        ));
    }
    ConformalField::try_from_fn(u.grid().clone(), u.time(), |x, y| {
        let (q, k) = m.apply_xy(x, y)?;
        Ok(u.interpolate(q.x, q.y)? * k)
    })
}

/// Pulls a closed-form conformal factor back by `m` and samples it on `grid`.
pub fn pullback_closed_form(
    grid: Arc<Grid>,
    time: f64,
    m: &MobiusMap,
    u: impl Fn(DiskPoint) -> Result<f64>,
) -> Result<ConformalField> {
    ConformalField::try_from_fn(grid, time, |x, y| {
        let (q, k) = m.apply_xy(x, y)?;
        Ok(u(q)? * k)
    })
}

/// Discrete Gauss curvature `K = −Δ log u / (2u)` at the interior nodes,
/// using the solver's stencil.
pub fn gauss_curvature(u: &ConformalField) -> Vec<f64> {
    u.laplacian_of_log()
        .iter()
        .zip(u.values())
        .map(|(l, v)| -l / (2.0 * v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn full_disk_values() {
        let m = HyperbolicMetric::FullDisk;
        assert_eq!(m.eval(DiskPoint::origin()).unwrap(), 4.0);
        assert!((m.eval_radius(0.5).unwrap() - 64.0 / 9.0).abs() < 1e-13);
        assert!(m.eval_radius(1.0).is_err());
    }

    #[test]
    fn sub_ball_at_origin() {
        let m = HyperbolicMetric::SubBall(0.5);
        assert!((m.eval_radius(0.0).unwrap() - 16.0).abs() < 1e-13);
        assert!(m.eval_radius(0.5).is_err());
        assert!(HyperbolicMetric::SubBall(1.5).eval_radius(0.1).is_err());
    }

    #[test]
    fn annulus_at_geometric_midpoint() {
        let m = HyperbolicMetric::Annulus((-1.0f64).exp());
        let v = m.eval_radius((-0.5f64).exp()).unwrap();
        assert!((v - PI * PI * E).abs() < 1e-12 * v);
        assert!(m.eval_radius(0.2).is_err());
    }

    #[test]
    fn annulus_branches_agree_at_the_switch() {
        // Both sine forms are used on either side of s = 1/2.
        let a: f64 = 0.3;
        let mid = a.sqrt();
        let m = HyperbolicMetric::Annulus(a);
        let lo = m.eval_radius(mid * (1.0 - 1e-9)).unwrap();
        let hi = m.eval_radius(mid * (1.0 + 1e-9)).unwrap();
        assert!((lo - hi).abs() < 1e-6 * lo);
    }

    #[test]
    fn ordering_example() {
        let r = metric_ordering_check(0.5, &[0.9]).unwrap();
        assert!(r.pass);
        assert!(metric_ordering_check(0.5, &[0.4]).is_err());
    }

    #[test]
    fn mobius_example() {
        let m = MobiusMap::new(Complex64::new(0.5, 0.0), 0.0).unwrap();
        let (q, k) = m.apply(DiskPoint::new(0.5, 0.0).unwrap());
        assert!(q.radius() < 1e-15);
        assert!((k - 16.0 / 9.0).abs() < 1e-14);
        let (q, k) = MobiusMap::identity().apply(DiskPoint::new(0.3, -0.2).unwrap());
        assert_eq!((q.x, q.y, k), (0.3, -0.2, 1.0));
        assert!(MobiusMap::new(Complex64::new(1.0, 0.0), 0.0).is_err());
    }
}
