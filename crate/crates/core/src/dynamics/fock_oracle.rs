use super::{closed_form_trajectory, require_sorted, MomentTrajectory, QuadraticPotential};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};
use crate::mepacket::{adaptive_cutoff, quantum_state, FockBasis, MEPacketParams, Representation};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Largest moment shift tolerated when the basis dimension is doubled.
pub const FOCK_TOL: f64 = 1e-8;

const MAX_DIM: usize = 2048;

#[derive(Clone, Debug)]
pub struct FockOracleReport {
    pub trajectory: MomentTrajectory<f64>,
    /// Dimension of the basis the trajectory was computed in.
    pub dim: usize,
    pub length: f64,
    /// Moment shift between dimensions `dim` and `2·dim` (or `dim/2` and
    /// `dim` when the dimension was chosen adaptively).
    pub doubling_shift: f64,
}

/// Reference length and a starting dimension for the oracle basis.
///
/// Only the phase-space extent is taken from the closed forms; the oracle's
/// moments are computed independently and certified by doubling.
pub fn fock_sizing(params: &MEPacketParams<f64>, pot: &QuadraticPotential<f64>, times: &[f64]) -> Result<(f64, usize)> {
    let nu = params.quantum_nu()?;
    let m = adaptive_cutoff(nu) as f64;
    // the highest kept K-level reaches √(2(2M+1)/ν) packet widths
    let c = (1.25 * (2.0 * (2.0 * m + 1.0) / nu).sqrt()).max(6.0);
    let mut all = vec![0.0];
    all.extend_from_slice(times);
    all.sort_by(f64::total_cmp);
    let tr = closed_form_trajectory(params, pot, &all)?;
    let x = (0..tr.len()).map(|i| tr.q[i].abs() + c * tr.dq[i]).fold(0.0, f64::max);
    let p = (0..tr.len()).map(|i| tr.p[i].abs() + c * tr.dp[i]).fold(0.0, f64::max);
    let length = (params.hbar * x / p).sqrt();
    let dim = ((x * p / (2.0 * params.hbar)).ceil() as usize + 16).next_multiple_of(8);
    Ok((length, dim))
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

fn sd(m2: f64, m: f64) -> Result<f64> {
    let var = m2 - m * m;
    if var < -1e-10 * m2.abs().max(1.0) {
        return Err(Error::NegativeVariance(var));
    }
    Ok(var.max(0.0).sqrt())
}

fn run(params: &MEPacketParams<f64>, pot: &QuadraticPotential<f64>, times: &[f64], length: f64, dim: usize) -> Result<MomentTrajectory<f64>> {
    let fb = FockBasis::new(dim, length, params.hbar)?;
    let packet = quantum_state(params, Representation::Fock(fb), None)?;
    let q = real_part(fb.q().matrix());
    // p is i times a real antisymmetric matrix in the number basis
    let p_im = fb.p().into_matrix().map(|z| z.im);
    let q2 = real_part(fb.q_squared().matrix());
    let p2 = real_part(fb.p_squared().matrix());
    let h = &p2 * (0.5 / pot.mu) + &q * pot.v1 + &q2 * (0.5 * pot.v2) + DMatrix::identity(dim, dim) * pot.v0;
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let vt = v.transpose();
    // T_H = Σ_m R_m Y_m Y_m† with Y = Vᵀ B
    let b = packet.basis();
    let y_re = &vt * b.map(|z| z.re);
    let y_im = &vt * b.map(|z| z.im);
    let w = packet.weights();
    let mut t_h = CMatrix::from_fn(dim, dim, |j, k| {
        let mut s = C64::new(0.0, 0.0);
        for (m, &r) in w.iter().enumerate() {
            s += C64::new(y_re[(j, m)], y_im[(j, m)]) * C64::new(y_re[(k, m)], -y_im[(k, m)]) * r;
        }
        s
    });
    let tr: f64 = (0..dim).map(|j| t_h[(j, j)].re).sum();
    t_h.unscale_mut(tr);
    let conj = |a: &DMatrix<f64>| &vt * a * v;
    // C_A[j,k] = T_H[j,k] A_H[k,j] so that tr[T(t) A] = Σ_jk e^{−i(E_j−E_k)t/ħ} C_A[j,k]
    let weighted = |a_h: DMatrix<f64>, unit: C64| CMatrix::from_fn(dim, dim, |j, k| t_h[(j, k)] * a_h[(k, j)] * unit);
    let one = C64::new(1.0, 0.0);
    let weights = [weighted(conj(&q), one), weighted(conj(&p_im), C64::new(0.0, 1.0)), weighted(conj(&q2), one), weighted(conj(&p2), one)];
    let rows: Vec<[f64; 5]> = times
        .par_iter()
        .map(|&t| {
            let phase: Vec<C64> = eig.eigenvalues.iter().map(|e| C64::from_polar(1.0, -e * t / params.hbar)).collect();
            let expect = |c: &CMatrix| -> f64 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..dim {
                    let mut col = C64::new(0.0, 0.0);
                    for j in 0..dim {
                        col += phase[j] * c[(j, k)];
                    }
                    s += col * phase[k].conj();
                }
                s.re
            };
            let (mq, mp, mq2, mp2) = (expect(&weights[0]), expect(&weights[1]), expect(&weights[2]), expect(&weights[3]));
            Ok([t, mq, mp, sd(mq2, mq)?, sd(mp2, mp)?])
        })
        .collect::<Result<_>>()?;
    let mut out = MomentTrajectory::with_capacity(times.len());
    for [t, q, p, dq, dp] in rows {
        out.push(t, q, p, dq, dp);
    }
    Ok(out)
}

/// Moments of the quantum ME packet evolved by `U(t) = exp(−iHt/ħ)` in a
/// truncated oscillator basis, `H = p²/2μ + V(q)` diagonalized once.
///
/// With `dim = Some(n)` the result is computed at `n` and checked against
/// `2n`. With `None` the dimension starts from [`fock_sizing`] and doubles
/// until consecutive results agree within [`FOCK_TOL`].
pub fn fock_quantum_oracle(
    params: &MEPacketParams<f64>,
    pot: &QuadraticPotential<f64>,
    times: &[f64],
    dim: Option<usize>,
) -> Result<FockOracleReport> {
    if pot.v2 < 0.0 {
        return Err(Error::InvalidParameter("Fock oracle needs V2 ≥ 0 (Hamiltonian bounded below)".into()));
    }
    require_sorted(times)?;
    params.quantum_nu()?;
    let (length, start) = fock_sizing(params, pot, times)?;
    match dim {
        Some(n) => {
            let a = run(params, pot, times, length, n)?;
            let b = run(params, pot, times, length, 2 * n)?;
            let shift = a.max_abs_diff(&b)?;
            if shift > FOCK_TOL {
                return Err(Error::CutoffNotConverged(shift));
            }
            Ok(FockOracleReport { trajectory: a, dim: n, length, doubling_shift: shift })
        }
        None => {
            let mut n = start;
            // a basis too small to hold the initial packet just means a larger start
            let mut a = loop {
                match run(params, pot, times, length, n) {
                    Err(Error::CutoffNotConverged(_)) if 2 * n <= MAX_DIM => n *= 2,
                    other => break other?,
                }
            };
            let mut shift = f64::INFINITY;
            while 2 * n <= MAX_DIM {
                let b = run(params, pot, times, length, 2 * n)?;
                shift = a.max_abs_diff(&b)?;
                if shift <= FOCK_TOL {
                    return Ok(FockOracleReport { trajectory: b, dim: 2 * n, length, doubling_shift: shift });
                }
                n *= 2;
                a = b;
            }
            Err(Error::CutoffNotConverged(shift))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_matches_closed_form() {
        let params = MEPacketParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let pot = QuadraticPotential::harmonic(1.0, 1.0).unwrap();
        let times = super::super::time_grid(2.0 * PI, 9);
        let rep = fock_quantum_oracle(&params, &pot, &times, None).unwrap();
        let cf = closed_form_trajectory(&params, &pot, &times).unwrap();
        assert!(rep.trajectory.max_abs_diff(&cf).unwrap() < 1e-8);
    }

    #[test]
    fn rejects_inverted_oscillator() {
        let params = MEPacketParams::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let pot = QuadraticPotential::harmonic(1.0, -1.0).unwrap();
        assert!(fock_quantum_oracle(&params, &pot, &[0.0, 1.0], None).is_err());
    }
}
