use super::{CMatrix, HilbertSpace, LinOp, C64};
use crate::error::{Error, Result};

/// Spin components `s¹, s², s³` on a `(2s+1)`-dimensional factor.
///
/// Basis order is `m = s, s−1, …, −s`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub s1: LinOp,
    pub s2: LinOp,
    pub s3: LinOp,
    pub hbar: f64,
}

impl SpinOps {
    /// `twice_s = 2s`, so spin-½ is `twice_s = 1`.
    pub fn new(twice_s: usize, hbar: f64, label: &str) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidParameter("spin must be positive".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        let d = twice_s + 1;
        let space = HilbertSpace::single(label, d)?;
        let s = twice_s as f64 / 2.0;
        let m = |i: usize| s - i as f64;
        // raising operator: ⟨m+1|s₊|m⟩ = ħ√(s(s+1) − m(m+1))
        let mut plus = CMatrix::zeros(d, d);
        for i in 1..d {
            let mi = m(i);
            plus[(i - 1, i)] = C64::new(hbar * (s * (s + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
        }
        let minus = plus.adjoint();
        let s1 = (&plus + &minus).unscale(2.0);
        let s2 = (&plus - &minus).map(|z| z / C64::new(0.0, 2.0));
        let s3 = CMatrix::from_fn(d, d, |r, c| if r == c { C64::new(hbar * m(r), 0.0) } else { C64::new(0.0, 0.0) });
        Ok(Self {
            s1: LinOp::new(space.clone(), s1)?,
            s2: LinOp::new(space.clone(), s2)?,
            s3: LinOp::new(space, s3)?,
            hbar,
        })
    }

    pub fn half(hbar: f64) -> Self {
        Self::new(1, hbar, "spin").expect("valid spin-1/2 parameters")
    }

    pub fn space(&self) -> &HilbertSpace {
        self.s3.space()
    }

    /// `n·s` for a real direction vector.
    pub fn along(&self, n: [f64; 3]) -> LinOp {
        self.s1
            .scale_real(n[0])
            .add(&self.s2.scale_real(n[1]))
            .and_then(|a| a.add(&self.s3.scale_real(n[2])))
            .expect("components share a space")
    }
}
