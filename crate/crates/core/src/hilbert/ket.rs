use super::{CVector, HilbertSpace, LinOp, Tensor, C64};
use crate::error::{Error, Result};

/// Vector in a labeled Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    space: HilbertSpace,
    amps: CVector,
}

impl Ket {
    pub fn new(space: HilbertSpace, amps: CVector) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: amps.len() });
        }
        Ok(Self { space, amps })
    }

    pub fn from_slice(space: HilbertSpace, amps: &[C64]) -> Result<Self> {
        Self::new(space, CVector::from_column_slice(amps))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::NotNormalizedVector(n));
        }
        Ok(Self { space: self.space.clone(), amps: self.amps.unscale(n) })
    }

    /// Checks `‖ψ‖ = 1` within `tol`.
    pub fn require_unit(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotNormalizedVector(n));
        }
        Ok(())
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space.clone(), amps: self.amps.map(|z| z * c) }
    }

    pub fn add(&self, other: &Ket) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(Self { space: self.space.clone(), amps: &self.amps + &other.amps })
    }

    /// Projector `|ψ⟩⟨ψ|` (not normalized).
    pub fn projector(&self) -> LinOp {
        LinOp::outer(self, self).expect("same space")
    }

    /// Reorders tensor factors: factor `i` of the result is factor `order[i]` of `self`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let (space, map) = super::linop::factor_permutation(&self.space, order)?;
        let amps = CVector::from_iterator(map.len(), map.iter().map(|&old| self.amps[old]));
        Ok(Self { space, amps })
    }
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        Ok(Self { space, amps: self.amps.kronecker(&other.amps) })
    }
}
