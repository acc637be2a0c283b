use super::Grid1D;
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, LinOp, C64};
use crate::povm::{DiscretePOVM, Effect};
use std::f64::consts::PI;

/// Half-open interval `[lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
}

impl Cell {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn whole_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }
}

/// Assigns every lattice point to exactly one cell.
fn assign(points: &[f64], cells: &[Cell]) -> Result<Vec<usize>> {
    if cells.is_empty() {
        return Err(Error::InvalidCells("no cells".into()));
    }
    points
        .iter()
        .map(|&x| {
            let mut hit = cells.iter().enumerate().filter(|(_, c)| c.contains(x)).map(|(i, _)| i);
            match (hit.next(), hit.next()) {
                (Some(i), None) => Ok(i),
                (None, _) => Err(Error::InvalidCells(format!("lattice point {x} is not covered"))),
                (Some(_), Some(_)) => Err(Error::InvalidCells(format!("lattice point {x} lies in two cells"))),
            }
        })
        .collect()
}

/// Outcome `k` labels cell `k`.
fn labels(cells: &[Cell]) -> Vec<Vec<f64>> {
    (0..cells.len()).map(|k| vec![k as f64]).collect()
}

/// Position PV measure: diagonal indicator effects `χ[X]`.
pub fn position_pvm(grid: &Grid1D, cells: &[Cell]) -> Result<DiscretePOVM> {
    let owner = assign(&grid.xs(), cells)?;
    let space = grid.space();
    let effects = (0..cells.len())
        .map(|c| {
            let diag: Vec<f64> = owner.iter().map(|&o| if o == c { 1.0 } else { 0.0 }).collect();
            Effect::new(LinOp::from_real_diagonal(space.clone(), &diag)?)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretePOVM::new(labels(cells), effects)
}

/// Momentum PV measure: indicator masks on the momentum lattice conjugated by
/// the DFT. A lattice momentum belongs to the cell containing it, so a cell
/// `[a, b)` effectively snaps to the lattice points `p_k` with `a ≤ p_k < b`.
pub fn momentum_pvm(grid: &Grid1D, cells: &[Cell]) -> Result<DiscretePOVM> {
    let n = grid.n;
    let owner = assign(&grid.ps(), cells)?;
    let space = grid.space();
    let effects = (0..cells.len())
        .map(|c| {
            // entry (j, l) = (1/n) Σ_{k ∈ cell} e^{2πi k (j−l)/n}
            let col: Vec<C64> = (0..n)
                .map(|m| {
                    owner
                        .iter()
                        .enumerate()
                        .filter(|(_, &o)| o == c)
                        .map(|(k, _)| C64::from_polar(1.0, 2.0 * PI * ((k * m) % n) as f64 / n as f64))
                        .sum::<C64>()
                        / n as f64
                })
                .collect();
            let m = CMatrix::from_fn(n, n, |j, l| col[(j + n - l) % n]);
            Effect::new(LinOp::new(space.clone(), m)?)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretePOVM::new(labels(cells), effects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridWavefunction;
    use crate::hilbert::linop::max_abs;

    #[test]
    fn whole_line_is_identity() {
        let g = Grid1D::centered(0.0, 0.3, 16, 1.0).unwrap();
        for pvm in [position_pvm(&g, &[Cell::whole_line()]).unwrap(), momentum_pvm(&g, &[Cell::whole_line()]).unwrap()] {
            let e = pvm.effects()[0].op().matrix();
            assert!(max_abs(&(e - CMatrix::identity(16, 16))) < 1e-13);
        }
    }

    #[test]
    fn overlapping_or_gapped_cells_rejected() {
        let g = Grid1D::centered(0.0, 0.3, 16, 1.0).unwrap();
        assert!(position_pvm(&g, &[Cell::new(f64::NEG_INFINITY, 0.5), Cell::new(0.0, f64::INFINITY)]).is_err());
        assert!(position_pvm(&g, &[Cell::new(f64::NEG_INFINITY, -0.5), Cell::new(0.5, f64::INFINITY)]).is_err());
    }

    #[test]
    fn gaussian_one_sigma_probability() {
        let g = Grid1D::centered(0.0, 0.02, 1024, 1.0).unwrap();
        let (q, s) = (0.3, 1.0);
        let psi = GridWavefunction::gaussian(g, q, 0.0, s).unwrap();
        let cells = [Cell::new(f64::NEG_INFINITY, q - s), Cell::new(q - s, q + s), Cell::new(q + s, f64::INFINITY)];
        let pvm = position_pvm(&g, &cells).unwrap();
        let t = psi.density().unwrap();
        let p = pvm.probability(&t, &[vec![1.0]]).unwrap();
        // erf(1/√2); the cell ends sit on lattice points, so allow one-sample quadrature error
        let want = statrs::function::erf::erf(1.0 / 2f64.sqrt());
        assert!((p - want).abs() < 0.02 * 0.5, "{p} vs {want}");
        // diagonal effects: E(X)E(Y) = 0 reduces to disjoint diagonals
        let e0 = pvm.effects()[0].op().matrix();
        let e1 = pvm.effects()[1].op().matrix();
        assert!((0..1024).all(|i| (e0[(i, i)] * e1[(i, i)]).norm() == 0.0));
    }
}
