use super::{AncillaPacket, CellGrid, PhaseCell, ALIAS_TOL};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridWavefunction};
use crate::hilbert::{CVector, HilbertSpace, Ket, LinOp, StateOperator, C64};
use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Eigen-components `(w, ψ)` of `T_S` above rounding level.
pub(super) fn components(ts: &StateOperator, grid: &Grid1D) -> Result<Vec<(f64, CVector)>> {
    if ts.space().dim() != grid.n {
        return Err(Error::DimensionMismatch { expected: grid.n, got: ts.space().dim() });
    }
    let e = ts.op().eigh()?;
    Ok(e.values
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-14)
        .map(|(i, &w)| (w, e.vectors.column(i).into_owned()))
        .collect())
}

fn wrapped_diff(j: usize, l: usize, n: usize) -> i64 {
    let h = (n / 2) as i64;
    (j as i64 - l as i64 + h).rem_euclid(n as i64) - h
}

/// Mass of `T_S ⊗ T_A` at separations `|q − Q| ≥ L/2` or total momenta
/// `|p + P| ≥ n dp/2`, where the periodic lattice folds values over.
fn require_unaliased(comps: &[(f64, CVector)], phi: &CVector, grid: &Grid1D) -> Result<()> {
    let n = grid.n;
    let h = (n / 2) as i64;
    let space = grid.space();
    let mut pos_s = vec![0.0; n];
    let mut mom_s = vec![0.0; n];
    for (w, s) in comps {
        for j in 0..n {
            pos_s[j] += w * s[j].norm_sqr();
        }
        let wf = GridWavefunction::from_ket(*grid, &Ket::new(space.clone(), s.clone())?)?;
        for (k, p) in wf.momentum_probabilities().into_iter().enumerate() {
            mom_s[k] += w * p;
        }
    }
    let pos_a: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
    let mom_a = GridWavefunction::from_ket(*grid, &Ket::new(space, phi.clone())?)?.momentum_probabilities();
    let mut mass = 0.0;
    for j in 0..n {
        for l in 0..n {
            if (j as i64 - l as i64).abs() >= h {
                mass += pos_s[j] * pos_a[l];
            }
            if (grid.freq_index(j) + grid.freq_index(l)).abs() >= h {
                mass += mom_s[j] * mom_a[l];
            }
        }
    }
    if mass > ALIAS_TOL {
        return Err(Error::Aliasing(mass));
    }
    Ok(())
}

/// Joint lattice distribution of `(A, B)` in `T_S ⊗ T_A`. Entry `(d, m)`
/// is `tr[E^A_d E^B_m (T_S ⊗ T_A)]` for the separation `a = d·dx` and the
/// total momentum `b = m·dp`, both indices running over `[−n/2, n/2)`.
///
/// On the slice `q − Q = d·dx` the product amplitude `ψ(q)φ(q − d·dx)` has
/// a two-dimensional DFT that depends on `k + K` only, so each slice costs
/// one FFT.
#[derive(Clone, Debug)]
pub struct JointLattice {
    grid: Grid1D,
    table: DMatrix<f64>,
}

impl JointLattice {
    pub fn new(ts: &StateOperator, ancilla: &AncillaPacket) -> Result<Self> {
        let grid = *ancilla.grid();
        let comps = components(ts, &grid)?;
        let phi = ancilla.wavefunction().to_ket().amplitudes().clone();
        require_unaliased(&comps, &phi, &grid)?;
        let n = grid.n;
        let h = (n / 2) as i64;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let d = i as i64 - h;
                let mut row = vec![0.0; n];
                let mut buf = vec![C64::new(0.0, 0.0); n];
                for (w, s) in &comps {
                    for (j, z) in buf.iter_mut().enumerate() {
                        let l = (j as i64 - d).rem_euclid(n as i64) as usize;
                        *z = s[j] * phi[l];
                    }
                    fft.process(&mut buf);
                    for (k, z) in buf.iter().enumerate() {
                        let m = (grid.freq_index(k) + h) as usize;
                        row[m] += w * z.norm_sqr() / n as f64;
                    }
                }
                row
            })
            .collect();
        let table = DMatrix::from_fn(n, n, |i, m| rows[i][m]);
        Ok(Self { grid, table })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Rows: separations `d = −n/2 … n/2−1`; columns: total momenta.
    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    pub fn total(&self) -> f64 {
        self.table.sum()
    }

    fn values(&self) -> (Vec<f64>, Vec<f64>) {
        let h = (self.grid.n / 2) as i64;
        let dp = self.grid.dp();
        let idx = |i: usize| (i as i64 - h) as f64;
        ((0..self.grid.n).map(|i| idx(i) * self.grid.dx).collect(), (0..self.grid.n).map(|i| idx(i) * dp).collect())
    }

    pub fn probability(&self, cell: &PhaseCell) -> f64 {
        let (a, b) = self.values();
        let mut s = 0.0;
        for (i, &ai) in a.iter().enumerate() {
            if !cell.contains_a(ai) {
                continue;
            }
            for (m, &bm) in b.iter().enumerate() {
                if cell.contains_b(bm) {
                    s += self.table[(i, m)];
                }
            }
        }
        s
    }

    /// Cell probabilities in [`CellGrid::cells`] order.
    pub fn probabilities(&self, cells: &CellGrid) -> Result<Vec<f64>> {
        if !cells.grid().approx_eq(&self.grid) {
            return Err(Error::InvalidCells("cell grid built on a different lattice".into()));
        }
        let h = (self.grid.n / 2) as i64;
        let locate = |edges: &[i64], v: i64| -> Option<usize> {
            if v < edges[0] || v >= edges[edges.len() - 1] {
                return None;
            }
            Some(edges.partition_point(|&e| e <= v) - 1)
        };
        let nb = cells.nb();
        let mut out = vec![0.0; cells.len()];
        for i in 0..self.grid.n {
            let Some(ia) = locate(cells.a_edge_indices(), i as i64 - h) else { continue };
            for m in 0..self.grid.n {
                if let Some(ib) = locate(cells.b_edge_indices(), m as i64 - h) {
                    out[ia * nb + ib] += self.table[(i, m)];
                }
            }
        }
        Ok(out)
    }

    /// Probability outside the window of `cells`.
    pub fn leakage(&self, cells: &CellGrid) -> Result<f64> {
        let inside: f64 = self.probabilities(cells)?.iter().sum();
        Ok((self.total() - inside).max(0.0))
    }
}

fn fft2(buf: &mut [C64], n: usize) {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for l in 0..n {
        for j in 0..n {
            col[j] = buf[j * n + l];
        }
        fft.process(&mut col);
        for j in 0..n {
            buf[j * n + l] = col[j];
        }
    }
}

/// `tr[E_k (T_S ⊗ T_A)]` with `E_k = E^A([a−, a+)) E^B([b−, b+))` applied on
/// the full two-particle grid: a mask on the separation `q − Q`, then a
/// mask on the total momentum in the two-dimensional DFT basis.
pub fn exact_cell_probability(ts: &StateOperator, ancilla: &AncillaPacket, cell: &PhaseCell) -> Result<f64> {
    let grid = *ancilla.grid();
    let comps = components(ts, &grid)?;
    let phi = ancilla.wavefunction().to_ket().amplitudes().clone();
    require_unaliased(&comps, &phi, &grid)?;
    let n = grid.n;
    let dp = grid.dp();
    let mut total = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); n * n];
    for (w, s) in &comps {
        for j in 0..n {
            for l in 0..n {
                let inside = cell.contains_a(wrapped_diff(j, l, n) as f64 * grid.dx);
                buf[j * n + l] = if inside { s[j] * phi[l] } else { C64::new(0.0, 0.0) };
            }
        }
        fft2(&mut buf, n);
        let mut mass = 0.0;
        for k in 0..n {
            for kk in 0..n {
                if cell.contains_b(grid.freq_index((k + kk) % n) as f64 * dp) {
                    mass += buf[k * n + kk].norm_sqr();
                }
            }
        }
        total += w * mass / (n * n) as f64;
    }
    Ok(total)
}

/// Dense `E_k = E^A E^B` on the two-particle space `S ⊗ A` (factor `S`
/// first). Meant for small lattices.
pub fn cell_projector(grid: &Grid1D, cell: &PhaseCell) -> Result<LinOp> {
    let n = grid.n;
    if n > 32 {
        return Err(Error::InvalidParameter(format!("dense cell projector needs n ≤ 32, got {n}")));
    }
    let space = HilbertSpace::new([("S", n), ("A", n)])?;
    let ea: Vec<f64> = (0..n * n)
        .map(|i| f64::from(u8::from(cell.contains_a(wrapped_diff(i / n, i % n, n) as f64 * grid.dx))))
        .collect();
    let dp = grid.dp();
    let eb: Vec<f64> = (0..n * n)
        .map(|i| f64::from(u8::from(cell.contains_b(grid.freq_index((i / n + i % n) % n) as f64 * dp))))
        .collect();
    let f = grid.dft_matrix();
    let f2 = f.kronecker(&f);
    let mut left = f2.adjoint();
    for (c, &x) in eb.iter().enumerate() {
        left.column_mut(c).scale_mut(x);
    }
    let mut e = left * f2;
    for (r, &x) in ea.iter().enumerate() {
        e.row_mut(r).scale_mut(x);
    }
    LinOp::new(space, e)
}
