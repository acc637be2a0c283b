//! Uniform-grid position representation on a periodic interval.
//!
//! Wavefunction samples `ψ_j = ψ(x_j)` carry the integration weight `dx`:
//! `⟨φ|ψ⟩ = dx Σ φ_j* ψ_j`. Operators are stored in the orthonormal basis
//! `e_j = δ_j/√dx`, where a kernel `K(x; x')` becomes the matrix `dx·K`.

mod kernel;
mod mask;
mod pair;
mod pvm;
mod wave;

pub use kernel::KernelOp;
pub use mask::RegionMask;
pub use pair::{
    cluster_separability_check, cluster_separability_dense, random_local_state, separation_status_check,
    symmetric_observable, symmetrize_pair, ClusterCheck, SeparationReport, SymmetricObservable,
    TwoParticleWavefunction, CLUSTER_TOL,
};
pub use pvm::{momentum_pvm, position_pvm, Cell};
pub use wave::GridWavefunction;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, LinOp, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform grid `x_j = x0 + j·dx`, `j = 0..n`, with periodic wrap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub hbar: f64,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize, hbar: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!("grid needs at least 8 points, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!("dx must be positive, got {dx}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter("x0 must be finite".into()));
        }
        Ok(Self { x0, dx, n, hbar })
    }

    /// Grid of `n` points whose middle sample (`j = n/2`) sits at `center`.
    pub fn centered(center: f64, dx: f64, n: usize, hbar: f64) -> Result<Self> {
        Self::new(center - (n / 2) as f64 * dx, dx, n, hbar)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// Momentum lattice spacing `2πħ/(n dx)`.
    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.extent()
    }

    /// Centered integer frequency of FFT bin `k`, in `[−n/2, n/2)`.
    pub fn freq_index(&self, k: usize) -> i64 {
        if k < self.n.div_ceil(2) {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Momentum of FFT bin `k`.
    pub fn p(&self, k: usize) -> f64 {
        self.freq_index(k) as f64 * self.dp()
    }

    /// Momenta in FFT bin order.
    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::single("x", self.n).expect("n ≥ 8")
    }

    /// Unitary DFT `F_kj = e^{−2πi k j/n}/√n` (rows in FFT bin order).
    pub fn dft_matrix(&self) -> CMatrix {
        let n = self.n;
        let s = 1.0 / (n as f64).sqrt();
        CMatrix::from_fn(n, n, |k, j| {
            let ph = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
            C64::from_polar(s, ph)
        })
    }

    /// `F† diag(f(p_k)) F`
    pub fn momentum_function(&self, f: impl Fn(f64) -> f64) -> LinOp {
        let n = self.n;
        let vals: Vec<f64> = (0..n).map(|k| f(self.p(k))).collect();
        // entry (j, l) = (1/n) Σ_k f(p_k) e^{2πi k (j−l)/n}; depends on j−l only
        let col: Vec<C64> = (0..n)
            .map(|m| {
                let mut s = C64::new(0.0, 0.0);
                for (k, &v) in vals.iter().enumerate() {
                    s += C64::from_polar(v, 2.0 * PI * ((k * m) % n) as f64 / n as f64);
                }
                s / n as f64
            })
            .collect();
        let m = CMatrix::from_fn(n, n, |j, l| col[(j + n - l) % n]);
        LinOp::new(self.space(), m).expect("grid dimension")
    }

    pub fn position_operator(&self) -> LinOp {
        LinOp::from_real_diagonal(self.space(), &self.xs()).expect("grid dimension")
    }

    pub fn momentum_operator(&self) -> LinOp {
        self.momentum_function(|p| p)
    }

    /// Periodic wrap of `x` into `[x0, x0 + n dx)`.
    pub fn wrap(&self, x: f64) -> f64 {
        self.x0 + (x - self.x0).rem_euclid(self.extent())
    }

    /// Same lattice up to rounding in the stored parameters.
    pub fn approx_eq(&self, other: &Grid1D) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        self.n == other.n && close(self.x0, other.x0) && close(self.dx, other.dx) && close(self.hbar, other.hbar)
    }

    pub(crate) fn require_same(&self, other: &Grid1D) -> Result<()> {
        if !self.approx_eq(other) {
            return Err(Error::InvalidParameter("operands live on different grids".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 0.1, 4, 1.0).is_err());
        assert!(Grid1D::new(0.0, -0.1, 16, 1.0).is_err());
        assert!(Grid1D::new(0.0, 0.1, 16, 0.0).is_err());
        let g = Grid1D::centered(1.0, 0.5, 16, 1.0).unwrap();
        assert_eq!(g.x(8), 1.0);
    }

    #[test]
    fn momentum_lattice_is_centered() {
        let g = Grid1D::new(0.0, 0.25, 8, 1.0).unwrap();
        let idx: Vec<i64> = (0..8).map(|k| g.freq_index(k)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.dp() - 2.0 * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dft_is_unitary_and_diagonalizes_momentum() {
        let g = Grid1D::new(-1.0, 0.3, 12, 0.7).unwrap();
        let f = g.dft_matrix();
        let id = f.adjoint() * &f;
        assert!(crate::hilbert::linop::max_abs(&(id - CMatrix::identity(12, 12))) < 1e-13);
        let p = g.momentum_operator();
        let d = &f * p.matrix() * f.adjoint();
        for k in 0..12 {
            for l in 0..12 {
                let want = if k == l { g.p(k) } else { 0.0 };
                assert!((d[(k, l)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}
