use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};

/// `Σ_mn B_mn ⟨n|m⟩` for `B = Σ_mn B_mn |m⟩⟨n|`, the columns of `family`
/// being the (not necessarily orthogonal) vectors `|n⟩`.
pub fn trace_of_expansion(coeffs: &CMatrix, family: &CMatrix) -> Result<C64> {
    let r = family.ncols();
    if coeffs.nrows() != r || coeffs.ncols() != r {
        return Err(Error::DimensionMismatch { expected: r, got: coeffs.nrows() });
    }
    let gram = family.adjoint() * family;
    Ok((0..r).flat_map(|m| (0..r).map(move |n| (m, n))).map(|(m, n)| coeffs[(m, n)] * gram[(n, m)]).sum())
}

/// `Σ_i ⟨e_i|B|e_i⟩` over an orthonormal basis (columns) of a subspace.
pub fn trace_on_subspace(b: &CMatrix, basis: &CMatrix) -> Result<C64> {
    if basis.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: basis.nrows() });
    }
    Ok((basis.adjoint() * b * basis).trace())
}
