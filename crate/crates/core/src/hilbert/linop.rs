use super::{CMatrix, HilbertSpace, Ket, Tensor, C64};
use crate::error::{Error, Result};

/// Dense linear operator on a labeled Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    space: HilbertSpace,
    matrix: CMatrix,
}

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// `Σ f(λ_i) |v_i⟩⟨v_i|`
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            scaled.column_mut(j).scale_mut(fv);
        }
        let mut out = CMatrix::zeros(n, n);
        out.gemm(C64::new(1.0, 0.0), &scaled, &self.vectors.adjoint(), C64::new(0.0, 0.0));
        out
    }
}

/// Hermitian eigendecomposition of a matrix assumed Hermitian.
pub(crate) fn eigh_matrix(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    let sym = (m + m.adjoint()).unscale(2.0);
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Index map for reordering factors: entry `new` holds the old flat index.
pub(crate) fn factor_permutation(
    space: &HilbertSpace,
    order: &[usize],
) -> Result<(HilbertSpace, Vec<usize>)> {
    let n = space.n_factors();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    for &o in order {
        if o >= n || seen[o] {
            return Err(Error::InvalidSpace(format!("bad factor order {order:?}")));
        }
        seen[o] = true;
    }
    let new_space = space.select(order)?;
    let old_strides = space.strides();
    let map = (0..space.dim())
        .map(|flat| {
            let multi = new_space.multi_index(flat);
            multi.iter().zip(order).map(|(&m, &o)| m * old_strides[o]).sum()
        })
        .collect();
    Ok((new_space, map))
}

impl LinOp {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self { space, matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self { space, matrix: CMatrix::zeros(d, d) }
    }

    pub fn from_real_diagonal(space: HilbertSpace, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: diag.len() });
        }
        let m = CMatrix::from_diagonal(&super::CVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Ok(Self { space, matrix: m })
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &Ket, bra: &Ket) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::DimensionMismatch { expected: ket.dim(), got: bra.dim() });
        }
        let m = ket.amplitudes() * bra.amplitudes().adjoint();
        Ok(Self { space: ket.space().clone(), matrix: m })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Replaces the factor structure, keeping the matrix.
    pub fn with_space(self, space: HilbertSpace) -> Result<Self> {
        Self::new(space, self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    /// `max |A − A†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs_entry().max(1.0)
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        if self.is_hermitian(tol) {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermiticity_defect()))
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn check_same(&self, other: &LinOp) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &LinOp) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &LinOp) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &LinOp) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.map(|z| z * c) }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(c) }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &LinOp) -> Result<Self> {
        self.check_same(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(Self { space: self.space.clone(), matrix: ab - ba })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if ket.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: ket.dim() });
        }
        Ket::new(self.space.clone(), &self.matrix * ket.amplitudes())
    }

    /// Eigendecomposition; fails for non-Hermitian operators.
    pub fn eigh(&self) -> Result<Eigh> {
        self.require_hermitian(1e-9)?;
        Ok(eigh_matrix(&self.matrix))
    }

    /// `f(A)` for Hermitian `A` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eigh()?;
        Ok(Self { space: self.space.clone(), matrix: e.reconstruct(f) })
    }

    /// Trace norm `tr|A|`, defined here for Hermitian operators only.
    pub fn trace_norm(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.values.iter().map(|v| v.abs()).sum())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.clone().singular_values().iter().fold(0.0_f64, |a, &s| a.max(s))
    }

    /// Reorders tensor factors: factor `i` of the result is factor `order[i]` of `self`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let (space, map) = factor_permutation(&self.space, order)?;
        let n = map.len();
        let matrix = CMatrix::from_fn(n, n, |r, c| self.matrix[(map[r], map[c])]);
        Ok(Self { space, matrix })
    }

    /// Partial trace keeping the listed factors (result keeps their original order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let nf = self.space.n_factors();
        if keep.iter().any(|&k| k >= nf) {
            return Err(Error::InvalidSpace(format!("partial trace keeps unknown factor in {keep:?}")));
        }
        let traced: Vec<usize> = (0..nf).filter(|f| !keep.contains(f)).collect();
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let kept_space = self.space.select(&keep)?;
        let traced_space = self.space.select(&traced)?;
        let strides = self.space.strides();
        let dk = kept_space.dim();
        let dt = traced_space.dim();
        let offset = |sub: &HilbertSpace, factors: &[usize], flat: usize| -> usize {
            sub.multi_index(flat).iter().zip(factors).map(|(&m, &f)| m * strides[f]).sum()
        };
        let kept_off: Vec<usize> = (0..dk).map(|i| offset(&kept_space, &keep, i)).collect();
        let mut out = CMatrix::zeros(dk, dk);
        for t in 0..dt {
            let toff = offset(&traced_space, &traced, t);
            for (i, &ki) in kept_off.iter().enumerate() {
                for (j, &kj) in kept_off.iter().enumerate() {
                    out[(i, j)] += self.matrix[(ki + toff, kj + toff)];
                }
            }
        }
        Ok(Self { space: kept_space, matrix: out })
    }
}

impl Tensor for LinOp {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        Ok(Self { space, matrix: self.matrix.kronecker(&other.matrix) })
    }
}
