use super::{Grid, Region};
use crate::error::{Error, Result};

/// Lower barrier for truncated masses `∫ (u − barrier)₊ dA`.
#[derive(Debug, Clone, Copy)]
pub enum Barrier<'a> {
    Constant(f64),
    Samples(&'a [f64]),
}

impl Barrier<'_> {
    fn at(&self, i: usize) -> f64 {
        match self {
            Barrier::Constant(k) => *k,
            Barrier::Samples(s) => s[i],
        }
    }
}

/// `∫_region f dA` by the grid's quadrature.
pub fn integrate(grid: &Grid, f: &[f64], region: Region) -> Result<f64> {
    grid.check_len(f.len())?;
    let w = grid.weights(region);
    Ok(w.iter().zip(f).filter(|(w, _)| **w != 0.0).map(|(w, v)| w * v).sum())
}

/// `(∫_region |f|^p dA)^{1/p}`.
pub fn lp_norm(grid: &Grid, f: &[f64], p: f64, region: Region) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("Lp exponent must be >= 1, got {p}")));
    }
    let g: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
    Ok(integrate(grid, &g, region)?.powf(1.0 / p))
}

/// `∫_region (f − barrier)₊ dA`.
pub fn truncated_l1(grid: &Grid, f: &[f64], barrier: Barrier<'_>, region: Region) -> Result<f64> {
    if let Barrier::Samples(s) = barrier {
        grid.check_len(s.len())?;
    }
    let g: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| (v - barrier.at(i)).max(0.0))
        .collect();
    integrate(grid, &g, region)
}

/// Largest sample among nodes whose positions lie in `region`.
pub fn sup_region(grid: &Grid, f: &[f64], region: Region) -> Result<f64> {
    grid.check_len(f.len())?;
    f.iter()
        .enumerate()
        .filter(|(i, _)| region.contains(grid.radius(*i)))
        .map(|(_, v)| *v)
        .reduce(f64::max)
        .ok_or_else(|| Error::InvalidInput(format!("region {region:?} contains no nodes")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{DiskGrid, RadialGrid};
    use std::f64::consts::PI;

    #[test]
    fn area_of_truncated_disk() {
        let g = Grid::Radial(RadialGrid::new(129, 0.1).unwrap());
        let one = vec![1.0; g.len()];
        let a = lp_norm(&g, &one, 1.0, Region::Full).unwrap();
        assert!((a - PI * 0.81).abs() < 1e-12);
    }

    #[test]
    fn truncated_mass_at_zero_is_l1_norm() {
        let g = Grid::Disk(DiskGrid::new(32, 0.1).unwrap());
        let f: Vec<f64> = g.points().iter().map(|(x, y)| 1.0 + x * x + y).collect();
        let a = truncated_l1(&g, &f, Barrier::Constant(0.0), Region::Full).unwrap();
        let b = lp_norm(&g, &f, 1.0, Region::Full).unwrap();
        assert!((a - b).abs() < 1e-12);
        let top = f.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(truncated_l1(&g, &f, Barrier::Constant(top), Region::Full).unwrap(), 0.0);
    }

    #[test]
    fn empty_region_is_rejected() {
        let g = Grid::Radial(RadialGrid::new(16, 0.1).unwrap());
        let f = vec![1.0; 16];
        assert!(sup_region(&g, &f, Region::Ball(0.01)).is_ok());
        let d = Grid::Disk(DiskGrid::new(16, 0.15).unwrap());
        let fd = vec![1.0; d.len()];
        assert!(sup_region(&d, &fd, Region::Ball(0.01)).is_err());
    }

    #[test]
    fn bad_exponent_is_rejected() {
        let g = Grid::Radial(RadialGrid::new(16, 0.1).unwrap());
        assert!(lp_norm(&g, &[1.0; 16], 0.5, Region::Full).is_err());
    }
}
