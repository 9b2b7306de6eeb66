//! Grids, quadrature, norms and the discrete Laplacian shared by the solver
//! and the audits.

mod disk;
mod field;
mod norms;
mod radial;

pub use disk::DiskGrid;
pub use field::ConformalField;
pub use norms::{integrate, lp_norm, sup_region, truncated_l1, Barrier};
pub use radial::RadialGrid;

use crate::error::{Error, Result};

/// Integration / supremum region: the whole truncated disk or the ball `B_ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Full,
    Ball(f64),
}

impl Region {
    pub fn contains(&self, radius: f64) -> bool {
        match *self {
            Region::Full => true,
            Region::Ball(rho) => radius <= rho * (1.0 + 1e-12),
        }
    }
}

/// A radial or Cartesian discretization of the disk.
///
/// Samples are stored for every node, interior first and boundary last, so a
/// field of length [`Grid::len`] always carries its Dirichlet closure.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Radial(RadialGrid),
    Disk(DiskGrid),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Radial(g) => g.n(),
            Grid::Disk(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of unknowns (non-boundary nodes).
    pub fn n_interior(&self) -> usize {
        match self {
            Grid::Radial(g) => g.n() - 1,
            Grid::Disk(g) => g.n_active(),
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            Grid::Radial(g) => g.eps(),
            Grid::Disk(g) => g.eps(),
        }
    }

    /// Resolution parameter: radial node count or cells per axis.
    pub fn resolution(&self) -> usize {
        match self {
            Grid::Radial(g) => g.n(),
            Grid::Disk(g) => g.n(),
        }
    }

    /// Cartesian position of node `i`; radial nodes sit on the positive x axis.
    pub fn point(&self, i: usize) -> (f64, f64) {
        match self {
            Grid::Radial(g) => (g.node(i), 0.0),
            Grid::Disk(g) => g.point(i),
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        let (x, y) = self.point(i);
        x.hypot(y)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            Grid::Radial(g) if g.disk_radius() < 1.0 => format!(
                "radial(n={}, eps={}, radius={})",
                g.n(),
                g.eps(),
                g.disk_radius()
            ),
            Grid::Radial(g) => format!("radial(n={}, eps={})", g.n(), g.eps()),
            Grid::Disk(g) => format!("disk(n={}, eps={})", g.n(), g.eps()),
        }
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len() {
            Ok(())
        } else if got == self.n_interior() {
            Err(Error::MissingBoundary {
                expected: self.len(),
                got,
            })
        } else {
            Err(Error::InvalidInput(format!(
                "field has {got} samples, grid {} has {}",
                self.describe(),
                self.len()
            )))
        }
    }

    /// Discrete Laplacian at the interior nodes. The input must include the
    /// boundary samples.
    pub fn laplacian(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        Ok(match self {
            Grid::Radial(g) => g.laplacian(f),
            Grid::Disk(g) => g.laplacian(f),
        })
    }

    /// Quadrature weights for `∫ f dA` over `region`, one per node.
    pub fn weights(&self, region: Region) -> Vec<f64> {
        let rho = match region {
            Region::Full => None,
            Region::Ball(r) => Some(r),
        };
        match self {
            Grid::Radial(g) => g.weights(rho),
            Grid::Disk(g) => g.weights(rho),
        }
    }

    pub fn interpolate(&self, f: &[f64], x: f64, y: f64) -> Result<f64> {
        self.check_len(f.len())?;
        match self {
            Grid::Radial(g) => g.interpolate(f, x.hypot(y)),
            Grid::Disk(g) => g.interpolate(f, x, y),
        }
    }

    /// Solves `(diag(shift) − L) x = rhs` on the interior with the boundary
    /// samples `boundary`, returning the interior values.
    pub(crate) fn solve_shifted(
        &self,
        shift: &[f64],
        rhs: &[f64],
        boundary: &[f64],
        guess: Option<&[f64]>,
    ) -> Result<Vec<f64>> {
        match self {
            Grid::Radial(g) => Ok(g.solve_shifted(shift, rhs, boundary[0])),
            Grid::Disk(g) => g.solve_shifted(shift, rhs, boundary, guess, 1e-13),
        }
    }

    /// Dirichlet solve of `Δψ = f` with boundary samples `boundary`; `f` is
    /// given at the interior nodes. Returns the full field.
    pub fn poisson(&self, f: &[f64], boundary: &[f64]) -> Result<Vec<f64>> {
        let m = self.n_interior();
        if f.len() != m || boundary.len() != self.len() - m {
            return Err(Error::InvalidInput(format!(
                "poisson expects {m} interior and {} boundary samples",
                self.len() - m
            )));
        }
        let psi = match self {
            Grid::Radial(g) => g.poisson(f, boundary[0]),
            Grid::Disk(g) => {
                let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
                let mut x = g.solve_shifted(&vec![0.0; m], &rhs, boundary, None, 1e-13)?;
                x.extend_from_slice(boundary);
                x
            }
        };
        let lap = self.laplacian(&psi)?;
        let scale = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let worst = lap
            .iter()
            .zip(f)
            .fold(0.0f64, |a, (l, v)| a.max((l - v).abs()));
        if !(worst <= 1e-10 * scale * (self.resolution() as f64)) {
            return Err(Error::Internal(format!(
                "poisson residual {worst:.3e} exceeds tolerance"
            )));
        }
        Ok(psi)
    }
}
