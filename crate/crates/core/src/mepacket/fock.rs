use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, LinOp, C64};

/// Truncated number basis of a reference oscillator with length `ℓ`:
/// `q = ℓ(a + a†)/√2`, `p = iħ(a† − a)/(ℓ√2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockBasis {
    pub dim: usize,
    pub length: f64,
    pub hbar: f64,
}

impl FockBasis {
    pub fn new(dim: usize, length: f64, hbar: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("Fock basis needs at least 2 states, got {dim}")));
        }
        if !(length > 0.0) || !(hbar > 0.0) {
            return Err(Error::InvalidParameter("length and hbar must be positive".into()));
        }
        Ok(Self { dim, length, hbar })
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::single("n", self.dim).expect("positive dimension")
    }

    fn ladder(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
    }

    fn q_of(&self, n: usize) -> CMatrix {
        let a = Self::ladder(n);
        (&a + a.adjoint()).scale(self.length / 2f64.sqrt())
    }

    fn p_of(&self, n: usize) -> CMatrix {
        let a = Self::ladder(n);
        (a.adjoint() - &a) * C64::new(0.0, self.hbar / (self.length * 2f64.sqrt()))
    }

    fn wrap(&self, m: CMatrix) -> LinOp {
        LinOp::new(self.space(), m).expect("basis dimension")
    }

    /// `a`
    pub fn annihilation(&self) -> LinOp {
        self.wrap(Self::ladder(self.dim))
    }

    pub fn number(&self) -> LinOp {
        let diag: Vec<f64> = (0..self.dim).map(|n| n as f64).collect();
        LinOp::from_real_diagonal(self.space(), &diag).expect("basis dimension")
    }

    pub fn q(&self) -> LinOp {
        self.wrap(self.q_of(self.dim))
    }

    pub fn p(&self) -> LinOp {
        self.wrap(self.p_of(self.dim))
    }

    /// Compression of `q²` onto the basis (exact on every entry, unlike the
    /// square of the truncated `q`).
    pub fn q_squared(&self) -> LinOp {
        let q = self.q_of(self.dim + 1);
        self.wrap((&q * &q).view((0, 0), (self.dim, self.dim)).into_owned())
    }

    pub fn p_squared(&self) -> LinOp {
        let p = self.p_of(self.dim + 1);
        self.wrap((&p * &p).view((0, 0), (self.dim, self.dim)).into_owned())
    }

    /// Compression of `a·q² + b·p² + c·(qp + pq)`.
    pub fn quadratic_form(&self, a: f64, b: f64, c: f64) -> LinOp {
        let q = self.q_of(self.dim + 1);
        let p = self.p_of(self.dim + 1);
        let m = (&q * &q).scale(a) + (&p * &p).scale(b) + (&q * &p + &p * &q).scale(c);
        self.wrap(m.view((0, 0), (self.dim, self.dim)).into_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linop::max_abs;

    #[test]
    fn canonical_commutator_except_last_level() {
        let b = FockBasis::new(12, 0.7, 1.3).unwrap();
        let c = b.q().commutator(&b.p()).unwrap();
        for i in 0..11 {
            assert!((c.matrix()[(i, i)] - C64::new(0.0, 1.3)).norm() < 1e-13);
        }
    }

    #[test]
    fn reference_oscillator_is_diagonal() {
        // with mass ħ/ℓ² and unit frequency, (μq² + p²/μ)/2 = ħ(n + ½)
        let b = FockBasis::new(10, 1.7, 0.9).unwrap();
        let mass = b.hbar / (b.length * b.length);
        let h = b.quadratic_form(mass / 2.0, 1.0 / (2.0 * mass), 0.0);
        let want = b.number().matrix().map(|z| z * 0.9) + CMatrix::identity(10, 10).scale(0.45);
        assert!(max_abs(&(h.matrix() - want)) < 1e-13);
        let qq = b.q().compose(&b.q()).unwrap();
        assert!(max_abs(&(qq.matrix() - b.q_squared().matrix()).view((0, 0), (9, 9)).into_owned()) < 1e-13);
    }
}
