//! Joint fuzzy measurement of position and momentum through a Gaussian
//! ancilla. The system particle (coordinates `q, p`) and the ancilla
//! (`Q, P`) live on the same [`Grid1D`]; the commuting pair `A = q − Q`,
//! `B = p + P` is measured sharply on the product.

mod approx;
mod exact;

pub use approx::{approx_cell_probability, convergence_study, effective_effect, effective_vector, CellRow, ConvergenceLevel, ConvergenceStudy};
pub use exact::{cell_projector, exact_cell_probability, JointLattice};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridWavefunction};
use crate::io;
use std::path::Path;

/// Momentum mass allowed in the outer half of either lattice, and position
/// mass allowed at wrapped separations `|q − Q| ≥ L/2`.
pub const ALIAS_TOL: f64 = 1e-10;

/// Rectangle `[a_lo, a_hi) × [b_lo, b_hi)` in the `(a, b)` outcome plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCell {
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
}

impl PhaseCell {
    pub fn new(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Result<Self> {
        if !(a_lo < a_hi && b_lo < b_hi) {
            return Err(Error::InvalidCells(format!("empty cell [{a_lo}, {a_hi}) × [{b_lo}, {b_hi})")));
        }
        Ok(Self { a_lo, a_hi, b_lo, b_hi })
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.a_lo + self.a_hi), 0.5 * (self.b_lo + self.b_hi))
    }

    /// `S_k`
    pub fn area(&self) -> f64 {
        (self.a_hi - self.a_lo) * (self.b_hi - self.b_lo)
    }

    pub fn contains_a(&self, a: f64) -> bool {
        a >= self.a_lo && a < self.a_hi
    }

    pub fn contains_b(&self, b: f64) -> bool {
        b >= self.b_lo && b < self.b_hi
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.contains_a(a) && self.contains_b(b)
    }
}

/// Product partition of a window in the `(a, b)` plane whose edges sit
/// halfway between lattice values. An `a` edge `e` is at `(e − ½)dx`, a `b`
/// edge at `(e − ½)dp`; the lattice separation `d·dx` falls in the cell
/// `[e_i, e_{i+1})` iff `e_i ≤ d < e_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    grid: Grid1D,
    a_edges: Vec<i64>,
    b_edges: Vec<i64>,
}

impl CellGrid {
    pub fn new(grid: Grid1D, a_edges: Vec<i64>, b_edges: Vec<i64>) -> Result<Self> {
        let half = (grid.n / 2) as i64;
        for (name, edges) in [("a", &a_edges), ("b", &b_edges)] {
            if edges.len() < 2 {
                return Err(Error::InvalidCells(format!("{name}: need at least two edges")));
            }
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidCells(format!("{name}: edges must increase strictly")));
            }
            if edges[0] < -half || *edges.last().unwrap() > half {
                return Err(Error::InvalidCells(format!("{name}: edges leave the lattice range ±{half}")));
            }
        }
        Ok(Self { grid, a_edges, b_edges })
    }

    /// `na × nb` equal cells, `a_step` and `b_step` lattice spacings wide,
    /// starting at the edges `a_start`, `b_start`.
    pub fn uniform(grid: Grid1D, a_start: i64, a_step: usize, na: usize, b_start: i64, b_step: usize, nb: usize) -> Result<Self> {
        let a = (0..=na).map(|i| a_start + (i * a_step) as i64).collect();
        let b = (0..=nb).map(|i| b_start + (i * b_step) as i64).collect();
        Self::new(grid, a, b)
    }

    /// Window of `na × nb` cells centred (to the nearest lattice value) on
    /// `(a0, b0)` with cell widths of `a_step` and `b_step` lattice spacings.
    pub fn centered(grid: Grid1D, center: (f64, f64), steps: (usize, usize), counts: (usize, usize)) -> Result<Self> {
        let ia = (center.0 / grid.dx).round() as i64;
        let ib = (center.1 / grid.dp()).round() as i64;
        let start = |i0: i64, step: usize, n: usize| i0 - ((step * n) / 2) as i64;
        Self::uniform(
            grid,
            start(ia, steps.0, counts.0),
            steps.0,
            counts.0,
            start(ib, steps.1, counts.1),
            steps.1,
            counts.1,
        )
    }

    /// Every lattice value of `(a, b)` in exactly one cell.
    pub fn covering(grid: Grid1D, a_step: usize, b_step: usize) -> Result<Self> {
        let n = grid.n;
        if a_step == 0 || b_step == 0 || n % a_step != 0 || n % b_step != 0 {
            return Err(Error::InvalidCells(format!("steps {a_step}, {b_step} must divide {n}")));
        }
        let half = (n / 2) as i64;
        Self::uniform(grid, -half, a_step, n / a_step, -half, b_step, n / b_step)
    }

    /// Every cell cut into four by its midlines.
    pub fn halved(&self) -> Result<Self> {
        let split = |edges: &[i64]| -> Result<Vec<i64>> {
            let mut out = vec![edges[0]];
            for w in edges.windows(2) {
                let width = w[1] - w[0];
                if width % 2 != 0 {
                    return Err(Error::InvalidCells(format!("cell of {width} lattice spacings cannot be halved")));
                }
                out.push(w[0] + width / 2);
                out.push(w[1]);
            }
            Ok(out)
        };
        Self::new(self.grid, split(&self.a_edges)?, split(&self.b_edges)?)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn na(&self) -> usize {
        self.a_edges.len() - 1
    }

    pub fn nb(&self) -> usize {
        self.b_edges.len() - 1
    }

    pub fn len(&self) -> usize {
        self.na() * self.nb()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn a_edge_indices(&self) -> &[i64] {
        &self.a_edges
    }

    pub fn b_edge_indices(&self) -> &[i64] {
        &self.b_edges
    }

    pub fn a_edges(&self) -> Vec<f64> {
        self.a_edges.iter().map(|&e| (e as f64 - 0.5) * self.grid.dx).collect()
    }

    pub fn b_edges(&self) -> Vec<f64> {
        let dp = self.grid.dp();
        self.b_edges.iter().map(|&e| (e as f64 - 0.5) * dp).collect()
    }

    /// Cells with `a` varying slowest.
    pub fn cells(&self) -> Vec<PhaseCell> {
        let a = self.a_edges();
        let b = self.b_edges();
        let mut out = Vec::with_capacity(self.len());
        for wa in a.windows(2) {
            for wb in b.windows(2) {
                out.push(PhaseCell { a_lo: wa[0], a_hi: wa[1], b_lo: wb[0], b_hi: wb[1] });
            }
        }
        out
    }

    /// Window `[a_min, a_max) × [b_min, b_max)`.
    pub fn window(&self) -> PhaseCell {
        let a = self.a_edges();
        let b = self.b_edges();
        PhaseCell { a_lo: a[0], a_hi: a[a.len() - 1], b_lo: b[0], b_hi: b[b.len() - 1] }
    }
}

/// The ancilla `Ψ_σ(Q) = (πσ²)^{−1/4} exp(−Q²/2σ²)`.
#[derive(Clone, Debug)]
pub struct AncillaPacket {
    sigma: f64,
    psi: GridWavefunction,
}

impl AncillaPacket {
    pub fn new(grid: Grid1D, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("ancilla width must be positive, got {sigma}")));
        }
        // GridWavefunction::gaussian is parametrized by ΔQ
        let psi = GridWavefunction::gaussian(grid, 0.0, 0.0, sigma / 2f64.sqrt())?;
        psi.require_resolved(ALIAS_TOL)?;
        Ok(Self { sigma, psi })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &Grid1D {
        self.psi.grid()
    }

    pub fn wavefunction(&self) -> &GridWavefunction {
        &self.psi
    }

    /// `Ψ_σ[a, b](Q) = Ψ_σ(Q − a) e^{−ibQ/ħ}`
    pub fn shifted_boosted(&self, a: f64, b: f64) -> GridWavefunction {
        self.psi.shift(a).boost(-b)
    }

    /// `(⟨Q⟩, ⟨P⟩, ΔQ, ΔP)` of `Ψ_σ[a, b]` on the grid.
    pub fn moments(&self, a: f64, b: f64) -> [f64; 4] {
        let w = self.shifted_boosted(a, b);
        let (q, dq) = w.position_moments();
        let (p, dp) = w.momentum_moments();
        [q, p, dq, dp]
    }

    /// `(a, −b, σ/√2, ħ/(σ√2))`
    pub fn expected_moments(&self, a: f64, b: f64) -> [f64; 4] {
        let r = 2f64.sqrt();
        [a, -b, self.sigma / r, self.grid().hbar / (self.sigma * r)]
    }
}

/// Writes `a_k, b_k, S_k, p_exact, p_approx_raw, p_approx_calibrated`.
pub fn write_cells_csv<P: AsRef<Path>>(path: P, rows: &[CellRow]) -> Result<()> {
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.a, r.b, r.area, r.p_exact, r.p_approx_raw, r.p_approx_calibrated])
        .collect();
    io::write_csv(path, &CellRow::HEADER, &data)
}
