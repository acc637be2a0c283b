use super::ChainParams;
use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::mepacket::FockBasis;
use nalgebra::DMatrix;

/// Stiffness matrix `κ²·D` of the potential in particle coordinates, `D` the
/// free-end path Laplacian.
pub fn coupling_matrix(n: usize, kappa: f64) -> DMatrix<f64> {
    let k2 = kappa * kappa;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let ends = usize::from(i == 0) + usize::from(i == n - 1);
            k2 * (2 - ends) as f64
        } else if i.abs_diff(j) == 1 {
            -k2
        } else {
            0.0
        }
    })
}

/// `ΔL²` by brute force. Normal modes come from diagonalizing the stiffness
/// matrix. Each phonon's Gibbs state is `e^{−λH}/Z` built from the compressed
/// Hamiltonian in a `levels`-dimensional oscillator basis. `⟨u²⟩` is a trace
/// against the compressed `u²`.
pub fn gibbs_length_variance(p: &ChainParams<f64>, levels: usize) -> Result<f64> {
    let n = p.n;
    let eig = (coupling_matrix(n, p.kappa) / p.mu).symmetric_eigen();
    let mut total = 0.0;
    for m in 0..n {
        let w2 = eig.eigenvalues[m];
        let c = eig.eigenvectors[(n - 1, m)] - eig.eigenvectors[(0, m)];
        if w2.abs() < 1e-12 * p.kappa * p.kappa / p.mu {
            // translation mode: constant vector, no length contribution
            if c.abs() > 1e-10 {
                return Err(Error::InvalidParameter("zero mode contributes to the length".into()));
            }
            continue;
        }
        let w = w2.sqrt();
        let fb = FockBasis::new(levels, (p.hbar / (p.mu * w)).sqrt(), p.hbar)?;
        let h = fb.quadratic_form(0.5 * p.mu * w2, 0.5 / p.mu, 0.0);
        let e0 = h.eigh()?.values[0];
        let rho = h.map_spectrum(|e| (-p.lambda * (e - e0)).exp())?;
        let z = rho.trace().re;
        let u2 = rho.compose(&fb.q_squared())?.trace() / C64::new(z, 0.0);
        total += c * c * u2.re;
    }
    Ok(total)
}
