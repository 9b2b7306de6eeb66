use crate::discretization::{integrate, ConformalField, Region};
use crate::error::{Error, Result};
use crate::report::CheckReport;

/// Convex `C¹` ramp with `γ(x) = 0` for `x ≤ −μ` and `γ(x) = x` for
/// `x ≥ μ`, bridged by the parabola `(x + μ)²/(4μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingGamma {
    mu: f64,
}

impl SmoothingGamma {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidInput(format!("gamma width mu must lie in (0, 1], got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mu = self.mu;
        if x <= -mu {
            0.0
        } else if x >= mu {
            x
        } else {
            (x + mu) * (x + mu) / (4.0 * mu)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mu = self.mu;
        if x <= -mu {
            0.0
        } else if x >= mu {
            1.0
        } else {
            (x + mu) / (2.0 * mu)
        }
    }
}

/// `v₀ = barrier + γ(u₀ − barrier)`, with the branches pinned so that the
/// postconditions hold exactly in floating point: `v₀ = u₀` where
/// `u₀ − barrier ≥ μ`, `v₀ = barrier` where `u₀ − barrier ≤ −μ`, and
/// `v₀ ≥ max(u₀, barrier)` on the bridge.
pub fn build_v0(u0: &ConformalField, barrier: &[f64], g: SmoothingGamma) -> Result<ConformalField> {
    u0.grid().check_len(barrier.len())?;
    if let Some(b) = barrier.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
        return Err(Error::InvalidInput(format!("barrier must be non-negative, found {b}")));
    }
    let values = u0
        .values()
        .iter()
        .zip(barrier)
        .map(|(&u, &b)| {
            let x = u - b;
            if x >= g.mu() {
                u
            } else if x <= -g.mu() {
                b
            } else {
                (b + g.eval(x)).max(u).max(b)
            }
        })
        .collect();
    ConformalField::new(u0.grid().clone(), values, u0.time())
}

/// Result of [`build_v0_auto`].
#[derive(Debug, Clone)]
pub struct V0Construction {
    pub v0: ConformalField,
    pub gamma: SmoothingGamma,
    /// `∫ (v₀ − barrier)`.
    pub excess_mass: f64,
    /// `∫ (u₀ − barrier)₊`.
    pub truncated_mass: f64,
    pub halvings: usize,
}

/// Builds `v₀`, halving `μ` from `mu_start` until
/// `∫(v₀ − barrier) ≤ ∫(u₀ − barrier)₊ + budget`.
pub fn build_v0_auto(
    u0: &ConformalField,
    barrier: &[f64],
    budget: f64,
    mu_start: f64,
) -> Result<V0Construction> {
    let grid = u0.grid();
    let trunc: Vec<f64> = u0
        .values()
        .iter()
        .zip(barrier)
        .map(|(u, b)| (u - b).max(0.0))
        .collect();
    let truncated_mass = integrate(grid, &trunc, Region::Full)?;
    let mut mu = mu_start;
    for halvings in 0..200 {
        let gamma = SmoothingGamma::new(mu)?;
        let v0 = build_v0(u0, barrier, gamma)?;
        let excess: Vec<f64> = v0.values().iter().zip(barrier).map(|(v, b)| v - b).collect();
        let excess_mass = integrate(grid, &excess, Region::Full)?;
        if excess_mass <= truncated_mass + budget {
            return Ok(V0Construction {
                v0,
                gamma,
                excess_mass,
                truncated_mass,
                halvings,
            });
        }
        mu *= 0.5;
    }
    Err(Error::Internal("mu shrinking did not meet the mass budget".into()))
}

/// Counts violations of the `v₀` postconditions at every node:
/// `v₀ ≥ barrier`, `v₀ ≥ u₀`, `v₀ = barrier` where `u₀ ≤ barrier − μ`, and
/// (for `μ ≤ 1`) `0 ≤ v₀ − barrier ≤ 1 + u₀`.
pub fn v0_postconditions(
    u0: &ConformalField,
    barrier: &[f64],
    v0: &ConformalField,
    g: SmoothingGamma,
) -> CheckReport {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for ((&u, &b), &v) in u0.values().iter().zip(barrier).zip(v0.values()) {
        let gaps = [v - b, v - u, 1.0 + u - (v - b)];
        for gap in gaps {
            worst = worst.min(gap);
            if gap < 0.0 {
                violations += 1;
            }
        }
        if u <= b - g.mu() && v != b {
            violations += 1;
        }
    }
    CheckReport::verdict(
        "v0_postconditions",
        violations as f64,
        0.0,
        worst,
        violations == 0,
    )
    .with_grid(u0.grid().describe())
    .with_eps(u0.grid().eps())
    .with_notes(format!(
        "mu={:.3e}; lhs = violation count; margin = smallest of v0-b, v0-u0, 1+u0-(v0-b)",
        g.mu()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        let g = SmoothingGamma::new(0.2).unwrap();
        assert_eq!(g.eval(-0.4), 0.0);
        assert!((g.eval(0.0) - 0.05).abs() < 1e-16);
        assert_eq!(g.eval(0.6), 0.6);
    }

    #[test]
    fn gamma_is_c1_at_the_joins() {
        let g = SmoothingGamma::new(0.3).unwrap();
        for x in [-0.3, 0.3] {
            let below = g.eval(x - 1e-9);
            let above = g.eval(x + 1e-9);
            assert!((below - above).abs() < 1e-8);
            assert!((g.derivative(x - 1e-12) - g.derivative(x + 1e-12)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_width() {
        assert!(SmoothingGamma::new(0.0).is_err());
        assert!(SmoothingGamma::new(1.5).is_err());
    }
}
