use crate::error::{Error, Result};

/// Cartesian cell-centred grid on `[-1, 1]²` restricted to the disk.
///
/// Active cells have centre radius `≤ 1 − eps` and carry unknowns; the ring
/// cells (inactive 4-neighbours of active cells) carry Dirichlet data. Nodes
/// are numbered with all active cells first, then the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid {
    n: usize,
    eps: f64,
    cells: Vec<(usize, usize)>,
    n_active: usize,
    neighbours: Vec<[usize; 4]>,
    lookup: Vec<Option<usize>>,
}

impl DiskGrid {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!(
                "disk grid needs at least 8 cells per axis, got {n}"
            )));
        }
        if !(eps > 0.0 && eps <= 0.2) {
            return Err(Error::InvalidInput(format!(
                "boundary truncation eps must lie in (0, 0.2], got {eps}"
            )));
        }
        let h = 2.0 / n as f64;
        let centre = |k: usize| -1.0 + (k as f64 + 0.5) * h;
        let limit = (1.0 - eps) * (1.0 - eps);
        let mut lookup = vec![None; n * n];
        let mut cells = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (centre(i), centre(j));
                if x * x + y * y <= limit {
                    lookup[j * n + i] = Some(cells.len());
                    cells.push((i, j));
                }
            }
        }
        let n_active = cells.len();
        if n_active == 0 {
            return Err(Error::InvalidInput("disk grid has no active cells".into()));
        }
        let mut neighbours = Vec::with_capacity(n_active);
        for a in 0..n_active {
            let (i, j) = cells[a];
            if i == 0 || j == 0 || i + 1 == n || j + 1 == n {
                return Err(Error::InvalidInput(
                    "active cell touches the bounding box; increase eps".into(),
                ));
            }
            let mut nb = [0usize; 4];
            for (slot, (ii, jj)) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
                .into_iter()
                .enumerate()
            {
                let key = jj * n + ii;
                let idx = match lookup[key] {
                    Some(idx) => idx,
                    None => {
                        let (x, y) = (centre(ii), centre(jj));
                        if x * x + y * y >= 1.0 {
                            return Err(Error::InvalidInput(format!(
                                "boundary ring leaves the disk (n={n}, eps={eps}); eps must exceed the cell size"
                            )));
                        }
                        let idx = cells.len();
                        lookup[key] = Some(idx);
                        cells.push((ii, jj));
                        idx
                    }
                };
                nb[slot] = idx;
            }
            neighbours.push(nb);
        }
        Ok(Self {
            n,
            eps,
            cells,
            n_active,
            neighbours,
            lookup,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cell_size(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn n_active(&self) -> usize {
        self.n_active
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.cell_size();
        let (i, j) = self.cells[idx];
        (-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h)
    }

    /// Flood fill over active cells; the mask is connected iff every active
    /// cell is reached from the first one.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_active];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(a) = stack.pop() {
            for &b in &self.neighbours[a] {
                if b < self.n_active && !seen[b] {
                    seen[b] = true;
                    count += 1;
                    stack.push(b);
                }
            }
        }
        count == self.n_active
    }

    pub(crate) fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let inv = 1.0 / (self.cell_size() * self.cell_size());
        self.neighbours
            .iter()
            .enumerate()
            .map(|(a, nb)| (f[nb[0]] + f[nb[1]] + f[nb[2]] + f[nb[3]] - 4.0 * f[a]) * inv)
            .collect()
    }

    /// `(diag(shift) − L) x` restricted to active cells, ring values zero.
    fn apply_shifted(&self, shift: &[f64], x: &[f64], out: &mut [f64]) {
        let inv = 1.0 / (self.cell_size() * self.cell_size());
        for (a, nb) in self.neighbours.iter().enumerate() {
            let mut s = 4.0 * x[a];
            for &b in nb {
                if b < self.n_active {
                    s -= x[b];
                }
            }
            out[a] = shift[a] * x[a] + s * inv;
        }
    }

    /// Solves `(diag(shift) − L) x = rhs` on active cells with the ring held
    /// at `ring` by Jacobi-preconditioned conjugate gradients. The matrix is
    /// symmetric positive definite for any non-negative shift.
    pub(crate) fn solve_shifted(
        &self,
        shift: &[f64],
        rhs: &[f64],
        ring: &[f64],
        x0: Option<&[f64]>,
        rel_tol: f64,
    ) -> Result<Vec<f64>> {
        let m = self.n_active;
        let inv = 1.0 / (self.cell_size() * self.cell_size());
        let mut b = rhs.to_vec();
        for (a, nb) in self.neighbours.iter().enumerate() {
            for &c in nb {
                if c >= m {
                    b[a] += ring[c - m] * inv;
                }
            }
        }
        let precond: Vec<f64> = shift.iter().map(|s| 1.0 / (s + 4.0 * inv)).collect();
        let mut x = x0.map_or_else(|| vec![0.0; m], <[f64]>::to_vec);
        let mut ax = vec![0.0; m];
        self.apply_shifted(shift, &x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let b_norm = norm(&b).max(f64::MIN_POSITIVE);
        let mut z: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri * pi).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let max_iter = 50 * self.n + 2000;
        let mut ap = vec![0.0; m];
        for _ in 0..max_iter {
            if norm(&r) <= rel_tol * b_norm {
                return Ok(x);
            }
            self.apply_shifted(shift, &p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..m {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            for k in 0..m {
                z[k] = r[k] * precond[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..m {
                p[k] = z[k] + beta * p[k];
            }
        }
        let rel = norm(&r) / b_norm;
        if rel <= rel_tol {
            Ok(x)
        } else {
            Err(Error::LinearSolve(rel))
        }
    }

    /// Cell areas inside `B_ρ` (exact circle/square intersection), or the
    /// full active area when `rho` is `None`.
    pub(crate) fn weights(&self, rho: Option<f64>) -> Vec<f64> {
        let h = self.cell_size();
        let mut w = vec![0.0; self.len()];
        for (a, wa) in w.iter_mut().enumerate().take(self.n_active) {
            *wa = match rho {
                None => h * h,
                Some(rho) => {
                    let (x, y) = self.point(a);
                    square_disk_overlap(x - h / 2.0, x + h / 2.0, y - h / 2.0, y + h / 2.0, rho)
                }
            };
        }
        w
    }

    /// Bilinear interpolation between cell centres.
    pub(crate) fn interpolate(&self, f: &[f64], x: f64, y: f64) -> Result<f64> {
        let h = self.cell_size();
        let fx = (x + 1.0) / h - 0.5;
        let fy = (y + 1.0) / h - 0.5;
        let support = 1.0 - self.eps;
        let fail = || Error::Interpolation {
            radius: (x * x + y * y).sqrt(),
            support,
        };
        if !(fx >= 0.0 && fy >= 0.0) {
            return Err(fail());
        }
        let (i0, j0) = (fx.floor() as usize, fy.floor() as usize);
        if i0 + 1 >= self.n || j0 + 1 >= self.n {
            return Err(fail());
        }
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let mut acc = 0.0;
        for (di, dj, wgt) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if wgt == 0.0 {
                continue;
            }
            let idx = self.lookup[(j0 + dj) * self.n + i0 + di].ok_or_else(fail)?;
            acc += wgt * f[idx];
        }
        Ok(acc)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Area of `[x0,x1]×[y0,y1] ∩ B_ρ` by inclusion–exclusion on the signed
/// quadrant areas.
pub(crate) fn square_disk_overlap(x0: f64, x1: f64, y0: f64, y1: f64, rho: f64) -> f64 {
    let s = |x: f64, y: f64| x.signum() * y.signum() * quadrant_area(x.abs(), y.abs(), rho);
    (s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0)).max(0.0)
}

/// Area of `{0 ≤ u ≤ x, 0 ≤ v ≤ y, u² + v² ≤ ρ²}`.
fn quadrant_area(x: f64, y: f64, rho: f64) -> f64 {
    let x = x.min(rho);
    let y = y.min(rho);
    if x * x + y * y <= rho * rho {
        return x * y;
    }
    let g = |u: f64| 0.5 * (u * (rho * rho - u * u).max(0.0).sqrt() + rho * rho * (u / rho).asin());
    let xc = (rho * rho - y * y).max(0.0).sqrt();
    xc * y + g(x) - g(xc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ring_must_stay_inside_the_disk() {
        assert!(DiskGrid::new(64, 0.01).is_err());
        assert!(DiskGrid::new(64, 0.05).is_ok());
    }

    #[test]
    fn mask_is_connected_and_inside() {
        let g = DiskGrid::new(64, 0.05).unwrap();
        assert!(g.is_connected());
        for a in 0..g.len() {
            let (x, y) = g.point(a);
            assert!(x * x + y * y < 1.0);
            if a < g.n_active() {
                assert!((x * x + y * y).sqrt() <= 0.95 + 1e-12);
            }
        }
    }

    #[test]
    fn overlap_is_exact_for_known_shapes() {
        // Whole disk from four quadrants.
        let a = square_disk_overlap(-1.0, 1.0, -1.0, 1.0, 0.7);
        assert!((a - PI * 0.49).abs() < 1e-13);
        // Square fully inside.
        assert!((square_disk_overlap(0.1, 0.2, 0.1, 0.2, 1.0) - 0.01).abs() < 1e-15);
        // Square fully outside.
        assert_eq!(square_disk_overlap(0.9, 1.0, 0.9, 1.0, 1.0), 0.0);
        // Half-plane cut: quarter of the disk.
        let q = square_disk_overlap(0.0, 2.0, 0.0, 2.0, 0.5);
        assert!((q - PI * 0.25 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn clipped_weights_sum_to_circle_area() {
        let g = DiskGrid::new(64, 0.05).unwrap();
        let area: f64 = g.weights(Some(0.5)).iter().sum();
        assert!((area - PI * 0.25).abs() < 1e-12);
    }

    #[test]
    fn cg_solves_poisson() {
        let g = DiskGrid::new(48, 0.1).unwrap();
        let m = g.n_active();
        let f = |x: f64, y: f64| x * x + 2.0 * y * y + x * y;
        let exact: Vec<f64> = (0..g.len()).map(|a| {
            let (x, y) = g.point(a);
            f(x, y)
        }).collect();
        // Δf = 6, exact for the 5-point stencil.
        let rhs = vec![-6.0; m];
        let sol = g
            .solve_shifted(&vec![0.0; m], &rhs, &exact[m..], None, 1e-12)
            .unwrap();
        for a in 0..m {
            assert!((sol[a] - exact[a]).abs() < 1e-8);
        }
    }
}
