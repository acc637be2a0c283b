use super::linop::eigh_matrix;
use super::{tol, HilbertSpace, Ket, LinOp, Tensor, C64};
use crate::error::{Error, Result};

/// Positive, unit-trace Hermitian operator, optionally carrying the convex
/// decomposition (gemenge) it was prepared as.
#[derive(Clone, Debug)]
pub struct StateOperator {
    op: LinOp,
    gemenge: Option<Vec<GemengeComponent>>,
}

#[derive(Clone, Debug)]
pub struct GemengeComponent {
    pub weight: f64,
    pub state: StateOperator,
}

impl StateOperator {
    /// Validates Hermiticity, unit trace and positivity.
    ///
    /// Eigenvalues in `[-1e-10, 0)` are clipped to zero and the result is
    /// renormalized; anything more negative is rejected.
    pub fn new(op: LinOp) -> Result<Self> {
        op.require_hermitian(tol::HERMITIAN)?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidTrace(tr.re));
        }
        let space = op.space().clone();
        let m = op.into_matrix();
        let sym = (&m + m.adjoint()).unscale(2.0);
        let e = eigh_matrix(&sym);
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -tol::POSITIVITY {
            return Err(Error::NotPositive(min));
        }
        let matrix = if min < 0.0 {
            let total: f64 = e.values.iter().map(|v| v.max(0.0)).sum();
            e.reconstruct(|v| v.max(0.0) / total)
        } else {
            sym
        };
        Ok(Self { op: LinOp::new(space, matrix)?, gemenge: None })
    }

    /// `P[ψ]` for a unit vector.
    pub fn pure(ket: &Ket) -> Result<Self> {
        ket.require_unit(1e-10)?;
        Ok(Self { op: ket.projector(), gemenge: None })
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim() as f64;
        Self { op: LinOp::identity(space).scale_real(1.0 / d), gemenge: None }
    }

    /// Builds the state `Σ w_k T_k` and keeps the decomposition.
    pub fn from_gemenge(components: Vec<(f64, StateOperator)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGemenge("no components".into()))?;
        let mut acc = LinOp::zeros(first.1.space().clone());
        let mut total = 0.0;
        for (w, t) in &components {
            if !(-1e-12..=1.0 + 1e-12).contains(w) {
                return Err(Error::InvalidGemenge(format!("weight {w} outside [0, 1]")));
            }
            acc = acc.add(&t.op.scale_real(*w))?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidGemenge(format!("weights sum to {total}")));
        }
        let op = StateOperator::new(acc)?.op;
        let gemenge = components
            .into_iter()
            .map(|(weight, state)| GemengeComponent { weight, state })
            .collect();
        Ok(Self { op, gemenge: Some(gemenge) })
    }

    /// `Σ_m w_m |v_m⟩⟨v_m|` over the columns of `vectors`, scaled to unit
    /// trace. Positive by construction, so no spectral check is made.
    pub(crate) fn from_weighted_columns(space: HilbertSpace, vectors: &super::CMatrix, weights: &[f64]) -> Result<Self> {
        if weights.len() != vectors.ncols() {
            return Err(Error::DimensionMismatch { expected: vectors.ncols(), got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::NotPositive(*w));
        }
        let scaled = super::CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * weights[j].sqrt());
        let m = &scaled * scaled.adjoint();
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(Self { op: LinOp::new(space, m.unscale(tr))?, gemenge: None })
    }

    /// Attaches a decomposition to an existing state after checking that the
    /// convex recombination reproduces it.
    pub fn with_gemenge(self, components: Vec<(f64, StateOperator)>) -> Result<Self> {
        let g = StateOperator::from_gemenge(components)?;
        let diff = super::linop::max_abs(&(self.op.matrix() - g.op.matrix()));
        if diff > 1e-10 {
            return Err(Error::InvalidGemenge(format!("recombination differs by {diff:e}")));
        }
        Ok(Self { op: self.op, gemenge: g.gemenge })
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn matrix(&self) -> &super::CMatrix {
        self.op.matrix()
    }

    pub fn space(&self) -> &HilbertSpace {
        self.op.space()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn gemenge(&self) -> Option<&[GemengeComponent]> {
        self.gemenge.as_deref()
    }

    /// `Σ w_k T_k` recomputed from the stored components.
    pub fn recombine(&self) -> Option<LinOp> {
        let g = self.gemenge.as_ref()?;
        let mut acc = LinOp::zeros(self.space().clone());
        for c in g {
            acc = acc.add(&c.state.op.scale_real(c.weight)).ok()?;
        }
        Some(acc)
    }

    /// `tr[T A]`
    pub fn expectation(&self, a: &LinOp) -> Result<C64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.dim() });
        }
        // tr[TA] = Σ_ij T_ij A_ji
        let t = self.op.matrix();
        let am = a.matrix();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                s += t[(i, j)] * am[(j, i)];
            }
        }
        Ok(s)
    }

    /// Real part of `tr[T A]`, intended for Hermitian `A`.
    pub fn expectation_real(&self, a: &LinOp) -> Result<f64> {
        Ok(self.expectation(a)?.re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh_matrix(self.op.matrix()).values
    }

    pub fn purity(&self) -> f64 {
        let m = self.op.matrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U T U†`; each gemenge component evolves with the same `U`.
    pub fn evolve(&self, u: &LinOp) -> Result<Self> {
        let m = u.matrix() * self.op.matrix() * u.matrix().adjoint();
        let op = LinOp::new(self.space().clone(), m)?;
        let gemenge = match &self.gemenge {
            None => None,
            Some(g) => Some(
                g.iter()
                    .map(|c| Ok(GemengeComponent { weight: c.weight, state: c.state.evolve(u)? }))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self { op, gemenge })
    }

    /// Reduced state on the kept factors.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        Ok(Self { op: self.op.partial_trace(keep)?, gemenge: None })
    }

    /// Trace-norm distance `‖T − T'‖₁`.
    pub fn trace_distance(&self, other: &StateOperator) -> Result<f64> {
        self.op.sub(&other.op)?.trace_norm()
    }

    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        Ok(Self { op: self.op.permute_factors(order)?, gemenge: None })
    }
}

impl Tensor for StateOperator {
    /// Product state; when both sides carry gemenges the product decomposition is kept.
    fn tensor(&self, other: &Self) -> Result<Self> {
        let op = self.op.tensor(&other.op)?;
        let gemenge = match (&self.gemenge, &other.gemenge) {
            (Some(a), Some(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for ca in a {
                    for cb in b {
                        out.push(GemengeComponent {
                            weight: ca.weight * cb.weight,
                            state: ca.state.tensor(&cb.state)?,
                        });
                    }
                }
                Some(out)
            }
            _ => None,
        };
        Ok(Self { op, gemenge })
    }
}
