use super::Grid1D;
use crate::error::{Error, Result};
use crate::hilbert::{CVector, Ket, StateOperator, C64};
use crate::io;
use rustfft::FftPlanner;
use std::path::Path;

/// Complex samples of a one-particle wavefunction on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridWavefunction {
    grid: Grid1D,
    values: Vec<C64>,
}

pub(crate) fn fft_forward(values: &mut [C64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(values.len()).process(values);
}

pub(crate) fn fft_inverse(values: &mut [C64]) {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(values);
    let s = 1.0 / n as f64;
    values.iter_mut().for_each(|z| *z *= s);
}

impl GridWavefunction {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.xs().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// Normalized minimum-uncertainty packet `∝ exp(−(x−q)²/(4σ²) + i p x/ħ)`.
    pub fn gaussian(grid: Grid1D, q: f64, p: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("packet width must be positive, got {sigma}")));
        }
        let hbar = grid.hbar;
        Self::from_fn(grid, |x| C64::from_polar((-(x - q).powi(2) / (4.0 * sigma * sigma)).exp(), p * x / hbar))
            .normalized()
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `dx Σ |ψ_j|²`
    pub fn norm_sq(&self) -> f64 {
        self.grid.dx * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sq();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NotNormalizedVector(n2.sqrt()));
        }
        let s = 1.0 / n2.sqrt();
        Ok(Self { grid: self.grid, values: self.values.iter().map(|z| z * s).collect() })
    }

    /// `⟨self|other⟩ = dx Σ self* other`
    pub fn inner(&self, other: &GridWavefunction) -> Result<C64> {
        self.grid.require_same(&other.grid)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.dx)
    }

    /// Coordinates in the orthonormal grid basis (`√dx ψ_j`).
    pub fn to_ket(&self) -> Ket {
        let s = self.grid.dx.sqrt();
        Ket::new(self.grid.space(), CVector::from_iterator(self.grid.n, self.values.iter().map(|z| z * s)))
            .expect("grid dimension")
    }

    pub fn from_ket(grid: Grid1D, ket: &Ket) -> Result<Self> {
        let s = 1.0 / grid.dx.sqrt();
        Self::new(grid, ket.amplitudes().iter().map(|z| z * s).collect())
    }

    /// `P[ψ]` in the orthonormal grid basis.
    pub fn density(&self) -> Result<StateOperator> {
        StateOperator::pure(&self.normalized()?.to_ket())
    }

    /// `|ψ_j|² dx`
    pub fn position_probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr() * self.grid.dx).collect()
    }

    /// Momentum amplitudes in FFT bin order, scaled so that `Σ |φ_k|² = ‖ψ‖²`.
    pub fn momentum_amplitudes(&self) -> Vec<C64> {
        let mut v = self.values.clone();
        fft_forward(&mut v);
        let s = (self.grid.dx / self.grid.n as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
        v
    }

    pub fn momentum_probabilities(&self) -> Vec<f64> {
        self.momentum_amplitudes().iter().map(|z| z.norm_sqr()).collect()
    }

    fn moments(weights: &[f64], points: &[f64]) -> (f64, f64) {
        let total: f64 = weights.iter().sum();
        let mean = weights.iter().zip(points).map(|(w, x)| w * x).sum::<f64>() / total;
        let var = weights.iter().zip(points).map(|(w, x)| w * (x - mean).powi(2)).sum::<f64>() / total;
        (mean, var.max(0.0).sqrt())
    }

    /// `(⟨q⟩, Δq)` on the unwrapped grid coordinates.
    pub fn position_moments(&self) -> (f64, f64) {
        Self::moments(&self.position_probabilities(), &self.grid.xs())
    }

    /// `(⟨p⟩, Δp)` on the centered momentum lattice.
    pub fn momentum_moments(&self) -> (f64, f64) {
        Self::moments(&self.momentum_probabilities(), &self.grid.ps())
    }

    /// Fraction of momentum probability in the outer `edge` fraction of the lattice on each side.
    pub fn momentum_edge_mass(&self, edge: f64) -> f64 {
        let probs = self.momentum_probabilities();
        let half = self.grid.n as f64 / 2.0;
        let cut = half * (1.0 - edge);
        let total: f64 = probs.iter().sum();
        let tail: f64 = (0..self.grid.n)
            .filter(|&k| (self.grid.freq_index(k) as f64).abs() >= cut)
            .map(|k| probs[k])
            .sum();
        tail / total
    }

    /// Fails with [`Error::Aliasing`] if more than `tol` of the momentum mass
    /// sits in the outer eighth of the lattice.
    pub fn require_resolved(&self, tol: f64) -> Result<()> {
        let m = self.momentum_edge_mass(0.125);
        if m > tol {
            return Err(Error::Aliasing(m));
        }
        Ok(())
    }

    /// `ψ(x − a)` with periodic wrap, applied as the Fourier phase `e^{−i p a/ħ}`.
    pub fn shift(&self, a: f64) -> Self {
        let mut v = self.values.clone();
        fft_forward(&mut v);
        for (k, z) in v.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -self.grid.p(k) * a / self.grid.hbar);
        }
        fft_inverse(&mut v);
        Self { grid: self.grid, values: v }
    }

    /// Multiplication by `e^{i μv x/ħ}`.
    pub fn boost(&self, mu_v: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.xs())
            .map(|(z, x)| z * C64::from_polar(1.0, mu_v * x / self.grid.hbar))
            .collect();
        Self { grid: self.grid, values }
    }

    /// Pointwise product with a real window (e.g. a region indicator).
    pub fn windowed(&self, w: impl Fn(usize) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(j, z)| z * w(j)).collect();
        Self { grid: self.grid, values }
    }

    /// CSV with columns `x, re, im`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let rows: Vec<Vec<f64>> =
            self.values.iter().enumerate().map(|(j, z)| vec![self.grid.x(j), z.re, z.im]).collect();
        io::write_csv(path, &["x", "re", "im"], &rows)
    }

    /// Reads `x, re, im`; the grid is recovered from the `x` column, which must be uniform.
    pub fn read_csv<P: AsRef<Path>>(path: P, hbar: f64) -> Result<Self> {
        let (header, rows) = io::read_csv(path)?;
        io::expect_header(&header, &["x", "re", "im"])?;
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let grid = grid_from_xs(&xs, hbar)?;
        Self::new(grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
    }
}

pub(crate) fn grid_from_xs(xs: &[f64], hbar: f64) -> Result<Grid1D> {
    if xs.len() < 2 {
        return Err(Error::Parse("need at least two grid points".into()));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (j, &x) in xs.iter().enumerate() {
        if (x - (xs[0] + j as f64 * dx)).abs() > 1e-9 * dx.abs().max(1.0) {
            return Err(Error::Parse(format!("x column is not uniform at row {}", j + 1)));
        }
    }
    Grid1D::new(xs[0], dx, xs.len(), hbar)
}
