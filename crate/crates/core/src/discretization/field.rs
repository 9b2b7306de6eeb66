use std::io::Write;
use std::sync::Arc;

use super::{Grid, Region};
use crate::error::{Error, Result};

/// Positive conformal factor sampled on every node of a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    time: f64,
}

impl ConformalField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        grid.check_len(values.len())?;
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::InvalidInput(format!("time stamp must be finite and >= 0, got {time}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "conformal factor must be positive and finite; node {i} has {v}"
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Arc<Grid>, time: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(|(x, y)| f(x, y)).collect();
        Self::new(grid, values, time)
    }

    pub fn try_from_fn(
        grid: Arc<Grid>,
        time: f64,
        f: impl Fn(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let values = grid
            .points()
            .into_iter()
            .map(|(x, y)| f(x, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Samples outside the interior (the Dirichlet closure).
    pub fn boundary(&self) -> &[f64] {
        &self.values[self.grid.n_interior()..]
    }

    pub fn log_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln()).collect()
    }

    /// `Δ log u` at the interior nodes.
    pub fn laplacian_of_log(&self) -> Vec<f64> {
        self.grid
            .laplacian(&self.log_values())
            .expect("field length matches its grid")
    }

    pub fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        self.grid.interpolate(&self.values, x, y)
    }

    /// Pointwise map of the samples, kept on the same grid and time.
    pub fn map(&self, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (x, y) = self.grid.point(i);
                f(x, y, *v)
            })
            .collect();
        Self::new(self.grid.clone(), values, self.time)
    }

    pub fn scale(&self, lambda: f64) -> Result<Self> {
        self.map(|_, _, v| lambda * v)
    }

    pub fn lp_norm(&self, p: f64, region: Region) -> Result<f64> {
        super::lp_norm(&self.grid, &self.values, p, region)
    }

    pub fn sup(&self, region: Region) -> Result<f64> {
        super::sup_region(&self.grid, &self.values, region)
    }

    /// Snapshot CSV: `r,u` for radial grids, `x,y,u` for disk grids.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        match self.grid.as_ref() {
            Grid::Radial(_) => {
                writeln!(out, "r,u")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(out, "{:.16e},{:.16e}", self.grid.point(i).0, v)?;
                }
            }
            Grid::Disk(_) => {
                writeln!(out, "x,y,u")?;
                for (i, v) in self.values.iter().enumerate() {
                    let (x, y) = self.grid.point(i);
                    writeln!(out, "{x:.16e},{y:.16e},{v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::RadialGrid;

    fn radial(n: usize) -> Arc<Grid> {
        Arc::new(Grid::Radial(RadialGrid::new(n, 0.1).unwrap()))
    }

    #[test]
    fn rejects_non_positive_samples() {
        let g = radial(16);
        let mut v = vec![1.0; 16];
        v[3] = 0.0;
        assert!(ConformalField::new(g.clone(), v, 0.0).is_err());
        assert!(ConformalField::new(g.clone(), vec![f64::NAN; 16], 0.0).is_err());
        assert!(ConformalField::new(g, vec![1.0; 16], -1.0).is_err());
    }

    #[test]
    fn csv_round_trips_full_precision() {
        let g = radial(16);
        let u = ConformalField::from_fn(g, 0.0, |x, _| 1.0 / 3.0 + x).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,u"));
        for (i, line) in lines.enumerate() {
            let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(v, u.values()[i]);
        }
    }
}
