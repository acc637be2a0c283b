//! Random kets, unitaries, Hermitian operators and states for property checks.

use super::{CMatrix, CVector, HilbertSpace, Ket, LinOp, StateOperator, C64};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar-distributed unit vector.
pub fn ket<R: Rng + ?Sized>(rng: &mut R, space: HilbertSpace) -> Ket {
    let d = space.dim();
    let v = CVector::from_fn(d, |_, _| gaussian_c64(rng));
    let n = v.norm();
    Ket::new(space, v.unscale(n)).expect("dimension from space")
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, space: HilbertSpace) -> LinOp {
    let d = space.dim();
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    LinOp::new(space, q).expect("dimension from space")
}

/// Hermitian operator `(G + G†)/2` from a Ginibre matrix.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, space: HilbertSpace) -> LinOp {
    let d = space.dim();
    let g = ginibre(rng, d, d);
    let h = (&g + g.adjoint()).unscale(2.0);
    LinOp::new(space, h).expect("dimension from space")
}

/// Full-rank random state `G G† / tr[G G†]`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, space: HilbertSpace) -> StateOperator {
    let d = space.dim();
    state_with_rank(rng, space, d)
}

/// Random state of rank at most `rank`.
pub fn state_with_rank<R: Rng + ?Sized>(rng: &mut R, space: HilbertSpace, rank: usize) -> StateOperator {
    let d = space.dim();
    let g = ginibre(rng, d, rank.max(1));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let w = w.unscale(tr);
    let h = (&w + w.adjoint()).unscale(2.0);
    StateOperator::new(LinOp::new(space, h).expect("dimension from space"))
        .expect("Wishart matrix is a state")
}

/// Random probability vector on `n` outcomes (flat Dirichlet).
pub fn simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}
