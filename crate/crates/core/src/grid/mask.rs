use super::wave::grid_from_xs;
use super::Grid1D;
use crate::error::{Error, Result};
use crate::hilbert::LinOp;
use crate::io;
use std::path::Path;

/// Grid sampling of an open region `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionMask {
    grid: GridKey,
    indicator: Vec<bool>,
}

/// Bitwise grid identity, so masks can derive `Eq`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct GridKey([u64; 3], usize);

impl From<&Grid1D> for GridKey {
    fn from(g: &Grid1D) -> Self {
        GridKey([g.x0.to_bits(), g.dx.to_bits(), g.hbar.to_bits()], g.n)
    }
}

impl GridKey {
    fn grid(&self) -> Grid1D {
        Grid1D {
            x0: f64::from_bits(self.0[0]),
            dx: f64::from_bits(self.0[1]),
            hbar: f64::from_bits(self.0[2]),
            n: self.1,
        }
    }
}

impl RegionMask {
    pub fn new(grid: &Grid1D, indicator: Vec<bool>) -> Result<Self> {
        if indicator.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: indicator.len() });
        }
        Ok(Self { grid: grid.into(), indicator })
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> bool) -> Self {
        Self { grid: grid.into(), indicator: grid.xs().into_iter().map(f).collect() }
    }

    /// Open interval `(a, b)`.
    pub fn interval(grid: &Grid1D, a: f64, b: f64) -> Self {
        Self::from_fn(grid, |x| x > a && x < b)
    }

    pub fn full(grid: &Grid1D) -> Self {
        Self { grid: grid.into(), indicator: vec![true; grid.n] }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid.grid()
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indicator[j]
    }

    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyMask)
        } else {
            Ok(())
        }
    }

    fn same_grid(&self, other: &RegionMask) -> Result<()> {
        if !self.grid().approx_eq(&other.grid()) {
            return Err(Error::InvalidParameter("masks live on different grids".into()));
        }
        Ok(())
    }

    pub(crate) fn require_grid(&self, grid: &Grid1D) -> Result<()> {
        if !self.grid().approx_eq(grid) {
            return Err(Error::InvalidParameter("mask and operand live on different grids".into()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &RegionMask, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.same_grid(other)?;
        let indicator = self.indicator.iter().zip(&other.indicator).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, indicator })
    }

    pub fn intersection(&self, other: &RegionMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &RegionMask) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid, indicator: self.indicator.iter().map(|b| !b).collect() }
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> Result<bool> {
        self.same_grid(other)?;
        Ok(self.indicator.iter().zip(&other.indicator).all(|(&a, &b)| !a || b))
    }

    pub fn is_disjoint(&self, other: &RegionMask) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }

    /// Orthogonal projection `P_D` onto functions supported in `D`.
    pub fn projector(&self) -> LinOp {
        let diag: Vec<f64> = self.indicator.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        LinOp::from_real_diagonal(self.grid().space(), &diag).expect("grid dimension")
    }

    /// CSV with columns `x, indicator` (indicator 0 or 1).
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let g = self.grid();
        let rows: Vec<Vec<f64>> = self
            .indicator
            .iter()
            .enumerate()
            .map(|(j, &b)| vec![g.x(j), if b { 1.0 } else { 0.0 }])
            .collect();
        io::write_csv(path, &["x", "indicator"], &rows)
    }

    pub fn read_csv<P: AsRef<Path>>(path: P, hbar: f64) -> Result<Self> {
        let (header, rows) = io::read_csv(path)?;
        io::expect_header(&header, &["x", "indicator"])?;
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let grid = grid_from_xs(&xs, hbar)?;
        let indicator = rows
            .iter()
            .map(|r| match r[1] {
                v if v == 0.0 => Ok(false),
                v if v == 1.0 => Ok(true),
                v => Err(Error::Parse(format!("indicator must be 0 or 1, got {v}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::new(&grid, indicator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let g = Grid1D::new(0.0, 1.0, 16, 1.0).unwrap();
        let a = RegionMask::interval(&g, 1.5, 8.5);
        let b = RegionMask::interval(&g, 5.5, 12.5);
        assert_eq!(a.count(), 7);
        assert_eq!(a.intersection(&b).unwrap().count(), 3);
        assert_eq!(a.union(&b).unwrap().count(), 11);
        assert!(a.intersection(&b).unwrap().is_subset_of(&a).unwrap());
        assert!(a.is_disjoint(&a.complement()).unwrap());
        assert!(RegionMask::interval(&g, 3.0, 3.5).require_nonempty().is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let g = Grid1D::new(-2.0, 0.25, 16, 1.0).unwrap();
        let m = RegionMask::interval(&g, -1.0, 0.6);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mask.csv");
        m.write_csv(&p).unwrap();
        assert_eq!(RegionMask::read_csv(&p, 1.0).unwrap(), m);
    }
}
