//! Finite-dimensional Hilbert-space algebra: kets, operators, tensor
//! products, partial traces, symmetrizers, entropies and Gibbs states.

mod ket;
pub(crate) mod linop;
pub mod random;
mod space;
mod spin;
mod state;
mod stats;
mod symmetry;

pub use ket::Ket;
pub use linop::{Eigh, LinOp};
pub use space::HilbertSpace;
pub use spin::SpinOps;
pub use state::{GemengeComponent, StateOperator};
pub use stats::{
    gibbs_state, normalized_correlation, shannon_entropy, variance, von_neumann_entropy,
    xlnx,
};
pub use symmetry::{permutation_operator, permutations, symmetrizer, symmetrizer_on, Symmetry};

use crate::error::Result;

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Numerical tolerances shared by the validators.
pub mod tol {
    /// Eigenvalues down to `-POSITIVITY` are treated as rounding and clipped.
    pub const POSITIVITY: f64 = 1e-10;
    pub const TRACE: f64 = 1e-9;
    /// Relative to `max(1, max |A_ij|)`.
    pub const HERMITIAN: f64 = 1e-10;
}

/// Kronecker product on the concatenated factor space.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn creal(re: f64) -> C64 {
    C64::new(re, 0.0)
}
