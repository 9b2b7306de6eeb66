//! Seeded families of radial initial data: sums of annular Gaussian bumps on
//! top of `h`, `s·h` or a constant.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{ConformalField, Grid};
use crate::error::Result;
use crate::geometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub weight: f64,
}

/// Background the bumps sit on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    /// `s·h`.
    Hyperbolic(f64),
    Constant(f64),
}

/// `base(r) + A χ(r) Σ w_j exp(−(r − c_j)²/(2σ_j²))` where `χ` is a smooth
/// cutoff from 1 at `cutoff.0` to 0 at `cutoff.1`, and `A` normalizes the
/// bump mass to `mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub index: usize,
    pub base: Base,
    pub bumps: Vec<Bump>,
    pub cutoff: (f64, f64),
    pub mass: f64,
    amplitude: f64,
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

impl InitialDatum {
    pub fn new(index: usize, base: Base, bumps: Vec<Bump>, cutoff: (f64, f64), mass: f64) -> Self {
        let mut d = Self {
            index,
            base,
            bumps,
            cutoff,
            mass,
            amplitude: 1.0,
        };
        let raw = d.bump_mass();
        d.amplitude = if raw > 0.0 { mass / raw } else { 0.0 };
        d
    }

    fn cutoff_at(&self, r: f64) -> f64 {
        let (r1, r2) = self.cutoff;
        if r <= r1 {
            1.0
        } else if r >= r2 {
            0.0
        } else {
            let a = smooth_step(r2 - r);
            a / (a + smooth_step(r - r1))
        }
    }

    /// The bump part at radius `r`.
    pub fn excess(&self, r: f64) -> f64 {
        let sum: f64 = self
            .bumps
            .iter()
            .map(|b| b.weight * (-(r - b.center).powi(2) / (2.0 * b.width * b.width)).exp())
            .sum();
        self.amplitude * self.cutoff_at(r) * sum
    }

    pub fn base_at(&self, r: f64) -> f64 {
        match self.base {
            Base::Hyperbolic(s) => s * geometry::h(r),
            Base::Constant(c) => c,
        }
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        self.base_at(r) + self.excess(r)
    }

    /// `∫ excess dA` by composite Simpson on `[0, cutoff.1]`, independent of
    /// any solver grid.
    pub fn bump_mass(&self) -> f64 {
        let n = 20_000;
        let top = self.cutoff.1;
        let dr = top / n as f64;
        let f = |r: f64| 2.0 * PI * r * self.excess(r);
        let mut acc = f(0.0) + f(top);
        for i in 1..n {
            acc += f(i as f64 * dr) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * dr / 3.0
    }

    pub fn sample(&self, grid: Arc<Grid>) -> Result<ConformalField> {
        ConformalField::from_fn(grid, 0.0, |x, y| self.eval_radius(x.hypot(y)))
    }

    /// The excess alone (`v₀ − base`) at every node.
    pub fn excess_samples(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.excess(grid.radius(i))).collect()
    }
}

fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn draw_bumps(rng: &mut ChaCha8Rng, max_center: f64) -> Vec<Bump> {
    let count = rng.gen_range(1..=5);
    (0..count)
        .map(|_| Bump {
            center: rng.gen_range(0.0..=max_center),
            width: rng.gen_range(0.04..=0.12),
            weight: rng.gen_range(0.2..=1.0),
        })
        .collect()
}

/// `v₀ = h + bumps` with `v₀ = h` outside `B_{1/2}` and bump mass in
/// `[0.25, 1]`.
pub fn harnack_family(seed: u64, count: usize) -> Vec<InitialDatum> {
    (0..count)
        .map(|index| {
            let mut rng = member_rng(seed, index);
            let bumps = draw_bumps(&mut rng, 0.35);
            let mass = rng.gen_range(0.25..=1.0);
            InitialDatum::new(index, Base::Hyperbolic(1.0), bumps, (0.4, 0.5), mass)
        })
        .collect()
}

/// General positive data: bumps on a constant in `[0.5, 3]` or on `s·h`
/// with `s ∈ [0.6, 1]`, bump mass in `[0.25, 3]`.
pub fn generic_family(seed: u64, count: usize) -> Vec<InitialDatum> {
    (0..count)
        .map(|index| {
            let mut rng = member_rng(seed, index);
            let base = if rng.gen_bool(0.5) {
                Base::Constant(rng.gen_range(0.5..=3.0))
            } else {
                Base::Hyperbolic(rng.gen_range(0.6..=1.0))
            };
            let bumps = draw_bumps(&mut rng, 0.5);
            let mass = rng.gen_range(0.25..=3.0);
            InitialDatum::new(index, base, bumps, (0.6, 0.75), mass)
        })
        .collect()
}
