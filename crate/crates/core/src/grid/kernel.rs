use super::{Grid1D, GridWavefunction, RegionMask};
use crate::error::{Error, Result};
use crate::hilbert::linop::max_abs;
use crate::hilbert::{CMatrix, LinOp, C64};

/// One-particle integral operator on a grid.
///
/// Stored as the matrix `M = dx·K` in the orthonormal grid basis, so the
/// kernel action `(Aφ)(x) = dx Σ K(x;x') φ(x')` is `M` applied to samples.
#[derive(Clone, Debug)]
pub struct KernelOp {
    grid: Grid1D,
    matrix: CMatrix,
}

impl KernelOp {
    /// From kernel values `K(x_i; x_j)`.
    pub fn from_kernel(grid: Grid1D, kernel: CMatrix) -> Result<Self> {
        Self::from_matrix(grid, kernel.scale(grid.dx))
    }

    /// From the orthonormal-basis matrix.
    pub fn from_matrix(grid: Grid1D, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != grid.n || matrix.ncols() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: matrix.nrows() });
        }
        Ok(Self { grid, matrix })
    }

    pub fn from_linop(grid: Grid1D, op: &LinOp) -> Result<Self> {
        Self::from_matrix(grid, op.matrix().clone())
    }

    pub fn identity(grid: Grid1D) -> Self {
        Self { grid, matrix: CMatrix::identity(grid.n, grid.n) }
    }

    /// `x δ(x − x')`
    pub fn position(grid: Grid1D) -> Self {
        Self::from_linop(grid, &grid.position_operator()).expect("grid dimension")
    }

    pub fn momentum(grid: Grid1D) -> Self {
        Self::from_linop(grid, &grid.momentum_operator()).expect("grid dimension")
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Kernel values `K(x_i; x_j) = M_ij / dx`.
    pub fn kernel(&self) -> CMatrix {
        self.matrix.unscale(self.grid.dx)
    }

    pub fn to_linop(&self) -> LinOp {
        LinOp::new(self.grid.space(), self.matrix.clone()).expect("grid dimension")
    }

    pub fn apply(&self, psi: &GridWavefunction) -> Result<GridWavefunction> {
        self.grid.require_same(psi.grid())?;
        let v = crate::hilbert::CVector::from_column_slice(psi.values());
        let out = &self.matrix * v;
        GridWavefunction::new(self.grid, out.iter().copied().collect())
    }

    /// `⟨ψ|Aψ⟩`
    pub fn expectation(&self, psi: &GridWavefunction) -> Result<C64> {
        psi.inner(&self.apply(psi)?)
    }

    pub fn compose(&self, other: &KernelOp) -> Result<Self> {
        self.grid.require_same(&other.grid)?;
        Ok(Self { grid: self.grid, matrix: &self.matrix * &other.matrix })
    }

    pub fn operator_norm(&self) -> f64 {
        self.to_linop().operator_norm()
    }

    /// `Λ_D(A) = P_D A P_D`
    pub fn d_localise(&self, d: &RegionMask) -> Result<Self> {
        d.require_grid(&self.grid)?;
        d.require_nonempty()?;
        let n = self.grid.n;
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            if d.contains(i) && d.contains(j) {
                self.matrix[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { grid: self.grid, matrix })
    }

    /// Largest kernel entry with a row or column outside `D`.
    pub fn locality_defect(&self, d: &RegionMask) -> Result<f64> {
        d.require_grid(&self.grid)?;
        let n = self.grid.n;
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if !(d.contains(i) && d.contains(j)) {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        Ok(m)
    }

    /// Both support conditions: the kernel vanishes for `x ∉ D` and annihilates
    /// functions supported outside `D`.
    pub fn is_d_local(&self, d: &RegionMask, tol: f64) -> Result<bool> {
        Ok(self.locality_defect(d)? <= tol * max_abs(&self.matrix).max(1.0))
    }
}
