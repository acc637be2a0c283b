use super::exact::components;
use super::{AncillaPacket, CellGrid, JointLattice, PhaseCell};
use crate::error::{Error, Result};
use crate::grid::GridWavefunction;
use crate::hilbert::{LinOp, StateOperator};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Vector `χ(q) = e^{ibq/ħ} Ψ_σ*(q − a)` of the operator
/// `⟨q|M|q'⟩ = e^{ib(q−q')/ħ} ⟨q'−a|T_A|q−a⟩` that the system state is
/// traced against. For the real Gaussian ancilla this is `Ψ_σ[a, −b]`.
pub fn effective_vector(ancilla: &AncillaPacket, a: f64, b: f64) -> GridWavefunction {
    let w = ancilla.wavefunction();
    let conj: Vec<_> = w.values().iter().map(|z| z.conj()).collect();
    GridWavefunction::new(*w.grid(), conj).expect("same grid").shift(a).boost(b)
}

fn prefactor(ancilla: &AncillaPacket, cell: &PhaseCell) -> f64 {
    let h = 2.0 * PI * ancilla.grid().hbar;
    cell.area() / (h * h)
}

/// `S_k/(2πħ)² |χ_k⟩⟨χ_k|` in the orthonormal grid basis.
pub fn effective_effect(ancilla: &AncillaPacket, cell: &PhaseCell) -> Result<LinOp> {
    let (a, b) = cell.center();
    let ket = effective_vector(ancilla, a, b).to_ket();
    Ok(ket.projector().scale_real(prefactor(ancilla, cell)))
}

/// `S_k/(2πħ)² tr[T_S M(a_k, b_k)]`
pub fn approx_cell_probability(ts: &StateOperator, ancilla: &AncillaPacket, cell: &PhaseCell) -> Result<f64> {
    let comps = components(ts, ancilla.grid())?;
    Ok(approx_from_components(&comps, ancilla, cell))
}

fn approx_from_components(comps: &[(f64, crate::hilbert::CVector)], ancilla: &AncillaPacket, cell: &PhaseCell) -> f64 {
    let (a, b) = cell.center();
    let chi = effective_vector(ancilla, a, b).to_ket();
    let chi = chi.amplitudes();
    let overlap: f64 = comps.iter().map(|(w, s)| w * chi.dotc(s).norm_sqr()).sum();
    prefactor(ancilla, cell) * overlap
}

/// One output line per cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRow {
    pub a: f64,
    pub b: f64,
    pub area: f64,
    pub p_exact: f64,
    pub p_approx_raw: f64,
    pub p_approx_calibrated: f64,
}

impl CellRow {
    pub const HEADER: [&'static str; 6] = ["a_k", "b_k", "S_k", "p_exact", "p_approx_raw", "p_approx_calibrated"];
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceLevel {
    pub halvings: usize,
    pub n_cells: usize,
    pub cell_area: f64,
    pub sum_exact: f64,
    pub leakage: f64,
    /// Least-squares `p_exact ≈ r · p_approx_raw` on this level alone.
    pub ratio: f64,
    pub max_err_raw: f64,
    pub max_err_calibrated: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    /// Ratio fitted on the finest level, where the curvature of the density
    /// across a cell matters least; multiplies the calibrated column.
    pub global_ratio: f64,
    /// Cell rows for each level.
    pub rows: Vec<Vec<CellRow>>,
}

impl ConvergenceStudy {
    fn strictly_decreasing(xs: impl Iterator<Item = f64>) -> bool {
        let v: Vec<f64> = xs.collect();
        v.windows(2).all(|w| w[1] < w[0])
    }

    pub fn raw_monotone(&self) -> bool {
        Self::strictly_decreasing(self.levels.iter().map(|l| l.max_err_raw))
    }

    pub fn calibrated_monotone(&self) -> bool {
        Self::strictly_decreasing(self.levels.iter().map(|l| l.max_err_calibrated))
    }

    /// Per-level ratios approach the global one monotonically.
    pub fn ratio_converges(&self) -> bool {
        Self::strictly_decreasing(self.levels.iter().map(|l| (l.ratio - self.global_ratio).abs()).take(self.levels.len() - 1))
    }
}

fn fit(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (num, den) = pairs.fold((0.0, 0.0), |(n, d), (e, r)| (n + e * r, d + r * r));
    num / den
}

/// Exact and approximate cell probabilities on `base` and on each of
/// `halvings` successive refinements.
pub fn convergence_study(
    ts: &StateOperator,
    ancilla: &AncillaPacket,
    base: &CellGrid,
    halvings: usize,
) -> Result<ConvergenceStudy> {
    let lattice = JointLattice::new(ts, ancilla)?;
    let comps = components(ts, ancilla.grid())?;
    let mut grids = vec![base.clone()];
    for _ in 0..halvings {
        let next = grids.last().unwrap().halved()?;
        grids.push(next);
    }
    let mut raw_levels = Vec::with_capacity(grids.len());
    for g in &grids {
        let cells = g.cells();
        let exact = lattice.probabilities(g)?;
        let raw: Vec<f64> = cells.par_iter().map(|c| approx_from_components(&comps, ancilla, c)).collect();
        raw_levels.push((cells, exact, raw, lattice.leakage(g)?));
    }
    let (_, e, r, _) = raw_levels.last().unwrap();
    let global_ratio = fit(e.iter().copied().zip(r.iter().copied()));
    if !global_ratio.is_finite() {
        return Err(Error::InvalidCells("approximate probabilities vanish on every cell".into()));
    }
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    for (h, (cells, exact, raw, leakage)) in raw_levels.into_iter().enumerate() {
        let level_rows: Vec<CellRow> = cells
            .iter()
            .zip(exact.iter().zip(&raw))
            .map(|(c, (&e, &r))| {
                let (a, b) = c.center();
                CellRow { a, b, area: c.area(), p_exact: e, p_approx_raw: r, p_approx_calibrated: global_ratio * r }
            })
            .collect();
        let max_err = |f: fn(&CellRow) -> f64| level_rows.iter().map(|r| (r.p_exact - f(r)).abs()).fold(0.0, f64::max);
        levels.push(ConvergenceLevel {
            halvings: h,
            n_cells: cells.len(),
            cell_area: cells[0].area(),
            sum_exact: exact.iter().sum(),
            leakage,
            ratio: fit(exact.iter().copied().zip(raw.iter().copied())),
            max_err_raw: max_err(|r| r.p_approx_raw),
            max_err_calibrated: max_err(|r| r.p_approx_calibrated),
        });
        rows.push(level_rows);
    }
    Ok(ConvergenceStudy { levels, global_ratio, rows })
}
