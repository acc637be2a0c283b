use super::{adaptive_cutoff, weight_tail, weights, FockBasis, MEPacketParams, TAIL_TOL};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridWavefunction};
use crate::hilbert::{CMatrix, Ket, StateOperator, C64};
use nalgebra::DMatrix;

/// Where the packet's state operator is realized.
#[derive(Clone, Copy, Debug)]
pub enum Representation {
    Fock(FockBasis),
    Grid(Grid1D),
}

/// `T = Σ_{m≤M} R_m |m⟩⟨m|` with `|m⟩` the eigenkets of
/// `K = ½(ΔP/ΔQ)(q−Q)² + ½(ΔQ/ΔP)(p−P)²`.
#[derive(Clone, Debug)]
pub struct QuantumMEPacket {
    params: MEPacketParams<f64>,
    nu: f64,
    weights: Vec<f64>,
    /// Columns are the kets `|0⟩ … |M⟩`.
    basis: CMatrix,
    representation: Representation,
    state: StateOperator,
}

impl QuantumMEPacket {
    pub fn params(&self) -> &MEPacketParams<f64> {
        &self.params
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Highest kept level `M`.
    pub fn max_index(&self) -> usize {
        self.weights.len() - 1
    }

    /// Unrenormalized `R_0 … R_M`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> f64 {
        weight_tail(self.nu, self.max_index())
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    /// The kets `|0⟩ … |M⟩` as columns.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn basis_ket(&self, m: usize) -> Ket {
        Ket::new(self.state.space().clone(), self.basis.column(m).into_owned()).expect("basis dimension")
    }

    pub fn state(&self) -> &StateOperator {
        &self.state
    }

    pub fn into_state(self) -> StateOperator {
        self.state
    }
}

/// Builds the quantum packet. `max_index = None` picks the smallest `M`
/// whose geometric tail is below [`TAIL_TOL`]; an explicit `M` with a larger
/// tail is rejected.
pub fn quantum_state(
    params: &MEPacketParams<f64>,
    representation: Representation,
    max_index: Option<usize>,
) -> Result<QuantumMEPacket> {
    let nu = params.quantum_nu()?;
    let m_max = match max_index {
        None => adaptive_cutoff(nu),
        Some(m) => {
            let tail = weight_tail(nu, m);
            if tail >= TAIL_TOL {
                return Err(Error::TailTooLarge { cutoff: m, tail });
            }
            m
        }
    };
    let w = weights(nu, m_max);
    let (basis, space) = match representation {
        Representation::Fock(fb) => (fock_k_basis(params, &fb, m_max)?, fb.space()),
        Representation::Grid(g) => (grid_k_basis(params, &g, m_max)?, g.space()),
    };
    let state = StateOperator::from_weighted_columns(space, &basis, &w)?;
    Ok(QuantumMEPacket { params: *params, nu, weights: w, basis, representation, state })
}

/// Kets `|0⟩ … |M⟩` of `K` expanded in the number basis. Overlaps with the
/// exact eigenfunctions (shifted, rescaled Hermite functions times
/// `e^{iPq/ħ}`) are computed by trapezoidal quadrature over the packet's
/// support, which is spectrally accurate for these integrands. The trace `T`
/// loses in the projection must stay below 1e-10; a larger deficit means the
/// basis is too small for the packet's displacement and squeezing.
fn fock_k_basis(params: &MEPacketParams<f64>, fb: &FockBasis, m_max: usize) -> Result<CMatrix> {
    if fb.dim <= m_max + 1 {
        return Err(Error::InvalidParameter(format!(
            "Fock basis of dimension {} cannot hold levels 0..={m_max}",
            fb.dim
        )));
    }
    if (fb.hbar - params.hbar).abs() > 1e-14 * params.hbar {
        return Err(Error::InvalidParameter("basis and packet disagree on hbar".into()));
    }
    let n = fb.dim;
    let count = m_max + 1;
    let lk = params.k_length_sq().sqrt();
    let reach = lk * ((2.0 * m_max as f64 + 1.0).sqrt() + 10.0);
    let k_max = (2.0 * n as f64 + 1.0).sqrt() / fb.length
        + params.p.abs() / params.hbar
        + (2.0 * m_max as f64 + 1.0).sqrt() / lk
        + 10.0 / fb.length
        + 10.0 / lk;
    let points = (2.0 * reach * k_max / std::f64::consts::PI).ceil() as usize + 1;
    let dx = 2.0 * reach / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|j| params.q - reach + j as f64 * dx).collect();
    let packet = hermite_functions(&xs, params.q, lk, count);
    let mut re = DMatrix::<f64>::zeros(n, count);
    let mut im = DMatrix::<f64>::zeros(n, count);
    for (c, cx) in xs.chunks(512).enumerate() {
        let offset = 512 * c;
        let phi = hermite_functions(cx, 0.0, fb.length, n);
        let phi = DMatrix::from_fn(n, cx.len(), |i, j| phi[i][j]);
        let kr = DMatrix::from_fn(cx.len(), count, |j, m| {
            dx * packet[m][offset + j] * (params.p * cx[j] / params.hbar).cos()
        });
        let ki = DMatrix::from_fn(cx.len(), count, |j, m| {
            dx * packet[m][offset + j] * (params.p * cx[j] / params.hbar).sin()
        });
        re += &phi * kr;
        im += &phi * ki;
    }
    let basis = CMatrix::from_fn(n, count, |i, m| C64::new(re[(i, m)], im[(i, m)]));
    // trace lost by T through the projection
    let w = weights(params.quantum_nu()?, m_max);
    let deficit: f64 = (0..count).map(|m| w[m] * (1.0 - basis.column(m).norm_squared()).abs()).sum();
    if deficit > 1e-10 {
        return Err(Error::CutoffNotConverged(deficit));
    }
    Ok(basis)
}

/// Hermite functions `φ_m((x − center)/ℓ)/√ℓ`, `m = 0..count`, at the
/// points `xs`, by the normalized three-term recurrence.
pub fn hermite_functions(xs: &[f64], center: f64, length: f64, count: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; xs.len()]; count];
    let norm = std::f64::consts::PI.powf(-0.25) / length.sqrt();
    for (j, &x) in xs.iter().enumerate() {
        let xi = (x - center) / length;
        let mut prev = 0.0;
        let mut cur = norm * (-0.5 * xi * xi).exp();
        for (m, row) in out.iter_mut().enumerate() {
            row[j] = cur;
            let mf = m as f64;
            let next = (2.0 / (mf + 1.0)).sqrt() * xi * cur - (mf / (mf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

fn grid_k_basis(params: &MEPacketParams<f64>, g: &Grid1D, m_max: usize) -> Result<CMatrix> {
    if (g.hbar - params.hbar).abs() > 1e-14 * params.hbar {
        return Err(Error::InvalidParameter("grid and packet disagree on hbar".into()));
    }
    let xs = g.xs();
    let h = hermite_functions(&xs, params.q, params.k_length_sq().sqrt(), m_max + 1);
    let sdx = g.dx.sqrt();
    let basis = CMatrix::from_fn(g.n, m_max + 1, |j, m| C64::from_polar(sdx * h[m][j], params.p * xs[j] / params.hbar));
    for m in 0..=m_max {
        let defect = (basis.column(m).norm_squared() - 1.0).abs();
        if defect > 1e-8 {
            return Err(Error::Aliasing(defect));
        }
    }
    let top = GridWavefunction::from_ket(*g, &Ket::new(g.space(), basis.column(m_max).into_owned())?)?;
    top.require_resolved(1e-8)?;
    Ok(basis)
}

/// The packet's `|0⟩` as the Gaussian
/// `(ν/2πΔQ²)^{1/4} exp[−ν(q−Q)²/4ΔQ² + iPq/ħ]` sampled on a grid.
pub fn ground_wavefunction(params: &MEPacketParams<f64>, grid: Grid1D) -> Result<GridWavefunction> {
    let nu = params.quantum_nu()?;
    let vq = params.dq * params.dq;
    let amp = (nu / (2.0 * std::f64::consts::PI * vq)).powf(0.25);
    Ok(GridWavefunction::from_fn(grid, |x| {
        C64::from_polar(amp * (-nu * (x - params.q).powi(2) / (4.0 * vq)).exp(), params.p * x / params.hbar)
    }))
}
