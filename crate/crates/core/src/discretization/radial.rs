use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform radial grid on `[0, radius·(1 − eps)]` for radially symmetric
/// fields on a disk of the given radius (1 for the unit disk).
///
/// The last node carries Dirichlet data; all other nodes are unknowns. The
/// origin is handled by the symmetric ghost node `f(−dr) = f(dr)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    eps: f64,
    radius: f64,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 16;
    pub const MAX_EPS: f64 = 0.2;

    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Self::with_radius(n, eps, 1.0)
    }

    /// Grid for a disk of radius `radius`, e.g. the sub-ball `B_ρ`.
    pub fn with_radius(n: usize, eps: f64, radius: f64) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "radial grid needs at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        if !(eps > 0.0 && eps <= Self::MAX_EPS) {
            return Err(Error::InvalidInput(format!(
                "boundary truncation eps must lie in (0, {}], got {eps}",
                Self::MAX_EPS
            )));
        }
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "disk radius must lie in (0, 1], got {radius}"
            )));
        }
        Ok(Self { n, eps, radius })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Radius of the disk being discretized.
    pub fn disk_radius(&self) -> f64 {
        self.radius
    }

    /// Position of the last (boundary) node.
    pub fn outer(&self) -> f64 {
        self.radius * (1.0 - self.eps)
    }

    pub fn dr(&self) -> f64 {
        self.outer() / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.outer()
        } else {
            i as f64 * self.dr()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Stencil coefficients `(lower, centre, upper)` of row `i`.
    ///
    /// Row 0 is the `r → 0` limit `2 f''(0)` with the ghost node folded into
    /// the upper coefficient; its lower coefficient is zero.
    pub(crate) fn row(&self, i: usize) -> (f64, f64, f64) {
        let dr = self.dr();
        let inv = 1.0 / (dr * dr);
        if i == 0 {
            (0.0, -4.0 * inv, 4.0 * inv)
        } else {
            let r = self.node(i);
            let adv = 1.0 / (2.0 * r * dr);
            (inv - adv, -2.0 * inv, inv + adv)
        }
    }

    pub(crate) fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n - 1)
            .map(|i| {
                let (lo, c, up) = self.row(i);
                let left = if i == 0 { 0.0 } else { lo * f[i - 1] };
                left + c * f[i] + up * f[i + 1]
            })
            .collect()
    }

    /// Solves `(diag(shift) − L) x = rhs` on the interior nodes with the
    /// boundary node fixed at `boundary`.
    pub(crate) fn solve_shifted(&self, shift: &[f64], rhs: &[f64], boundary: f64) -> Vec<f64> {
        let m = self.n - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut b = rhs.to_vec();
        for i in 0..m {
            let (lo, c, up) = self.row(i);
            lower[i] = -lo;
            diag[i] = shift[i] - c;
            upper[i] = -up;
        }
        b[m - 1] -= upper[m - 1] * boundary;
        upper[m - 1] = 0.0;
        thomas(&lower, &diag, &upper, &mut b);
        b
    }

    /// Finite-volume areas of the interior nodes: the quarter-disk at the
    /// origin and `2π r dr` rings elsewhere. The stencil is symmetric with
    /// respect to these weights.
    pub fn control_volumes(&self) -> Vec<f64> {
        let dr = self.dr();
        (0..self.n - 1)
            .map(|i| {
                if i == 0 {
                    PI * dr * dr / 4.0
                } else {
                    2.0 * PI * self.node(i) * dr
                }
            })
            .collect()
    }

    /// Trapezoid weights for `∫ f dA` over `B_ρ ∩ [0, outer]`, with the
    /// segment cut by `ρ` integrated by linear interpolation of `r f`.
    pub(crate) fn weights(&self, rho: Option<f64>) -> Vec<f64> {
        let dr = self.dr();
        let outer = self.outer();
        let mut w = vec![0.0; self.n];
        let limit = rho.map_or(outer, |r| r.min(outer));
        if limit <= 0.0 {
            return w;
        }
        let last_full = if limit >= outer {
            self.n - 1
        } else {
            ((limit / dr).floor() as usize).min(self.n - 2)
        };
        for (i, wi) in w.iter_mut().enumerate().take(last_full + 1).skip(1) {
            *wi = 2.0 * PI * self.node(i) * dr;
        }
        if last_full > 0 {
            w[last_full] *= 0.5;
        }
        if limit < outer {
            let rj = self.node(last_full);
            let theta = ((limit - rj) / dr).clamp(0.0, 1.0);
            if theta > 0.0 {
                w[last_full] += PI * rj * theta * (2.0 - theta) * dr;
                w[last_full + 1] += PI * self.node(last_full + 1) * theta * theta * dr;
            }
        }
        w
    }

    /// Piecewise-linear interpolation at radius `r`.
    pub(crate) fn interpolate(&self, f: &[f64], r: f64) -> Result<f64> {
        let outer = self.outer();
        if !(r >= 0.0) || r > outer * (1.0 + 1e-12) {
            return Err(Error::Interpolation {
                radius: r,
                support: outer,
            });
        }
        let dr = self.dr();
        let s = (r / dr).min((self.n - 1) as f64);
        let j = (s.floor() as usize).min(self.n - 2);
        let theta = (r - self.node(j)) / (self.node(j + 1) - self.node(j));
        let theta = theta.clamp(0.0, 1.0);
        Ok((1.0 - theta) * f[j] + theta * f[j + 1])
    }

    /// Closed-form Dirichlet solve of `Δψ = f` for radial data:
    /// `ψ(r) = ψ(outer) − ∫_r^outer F(s)/s ds`, `F(s) = ∫_0^s f τ dτ`.
    ///
    /// The inner integral uses the control volumes and the outer one the
    /// midpoint rule at half nodes, which makes the result an exact inverse
    /// of the discrete Laplacian.
    pub(crate) fn poisson(&self, f: &[f64], boundary: f64) -> Vec<f64> {
        let dr = self.dr();
        let vols = self.control_volumes();
        let mut psi = vec![0.0; self.n];
        psi[self.n - 1] = boundary;
        let mut enclosed = vec![0.0; self.n - 1];
        let mut acc = 0.0;
        for i in 0..self.n - 1 {
            acc += vols[i] * f[i];
            enclosed[i] = acc;
        }
        for i in (0..self.n - 1).rev() {
            let r_half = (i as f64 + 0.5) * dr;
            let r_half = if i + 2 == self.n {
                0.5 * (self.node(i) + self.outer())
            } else {
                r_half
            };
            psi[i] = psi[i + 1] - dr * enclosed[i] / (2.0 * PI * r_half);
        }
        psi
    }
}

/// Tridiagonal solve; `lower[0]` and `upper[last]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut beta = diag[0];
    c[0] = upper[0] / beta;
    rhs[0] /= beta;
    for i in 1..m {
        beta = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / beta;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}
