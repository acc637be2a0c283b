use super::linop::max_abs;
use super::{LinOp, StateOperator};
use crate::error::{Error, Result};

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `−Σ p ln p` in nats; entries within rounding of zero contribute nothing.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlnx(x)).sum::<f64>()
}

/// `S(T) = −tr[T ln T]` in nats.
pub fn von_neumann_entropy(t: &StateOperator) -> f64 {
    shannon_entropy(&t.eigenvalues()).max(0.0)
}

/// `ΔA = sqrt(tr[T A²] − tr[T A]²)`.
pub fn variance(a: &LinOp, t: &StateOperator) -> Result<f64> {
    a.require_hermitian(super::tol::HERMITIAN)?;
    let m1 = t.expectation_real(a)?;
    let m2 = t.expectation_real(&a.compose(a)?)?;
    let rad = m2 - m1 * m1;
    let scale = m2.abs().max(1.0);
    if rad < -1e-10 * scale {
        return Err(Error::NegativeVariance(rad));
    }
    Ok(rad.max(0.0).sqrt())
}

/// `C(A,B) = (tr[TAB] − tr[TA] tr[TB]) / (ΔA ΔB)` for commuting `A`, `B`.
pub fn normalized_correlation(a: &LinOp, b: &LinOp, t: &StateOperator) -> Result<f64> {
    let comm = a.commutator(b)?;
    let scale = a.max_abs_entry().max(1.0) * b.max_abs_entry().max(1.0);
    let defect = max_abs(comm.matrix());
    if defect > 1e-10 * scale {
        return Err(Error::NonCommuting(defect));
    }
    let da = variance(a, t)?;
    let db = variance(b, t)?;
    if da <= 1e-12 || db <= 1e-12 {
        return Err(Error::ZeroVariance);
    }
    let ab = t.expectation_real(&a.compose(b)?)?;
    let c = (ab - t.expectation_real(a)? * t.expectation_real(b)?) / (da * db);
    Ok(c.clamp(-1.0, 1.0))
}

/// Gibbs state `e^{−λH}/tr[e^{−λH}]` with mean energy `e_target`, and its `λ`.
///
/// `λ` is found by bisection on the decreasing map `λ ↦ tr[T_λ H]`; the
/// bracket grows geometrically from `[−1, 1]`, in units of the inverse
/// spectral width.
pub fn gibbs_state(h: &LinOp, e_target: f64) -> Result<(StateOperator, f64)> {
    let eig = h.eigh()?;
    let e = &eig.values;
    let (lo_e, hi_e) = (e[0], e[e.len() - 1]);
    let width = hi_e - lo_e;
    if !(e_target > lo_e && e_target < hi_e) || width <= 0.0 {
        return Err(Error::OutOfRange { value: e_target, min: lo_e, max: hi_e });
    }
    let weights = |lam: f64| -> Vec<f64> {
        let shift = if lam >= 0.0 { lo_e } else { hi_e };
        let w: Vec<f64> = e.iter().map(|&x| (-lam * (x - shift)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    };
    let mean = |lam: f64| -> f64 { weights(lam).iter().zip(e).map(|(p, x)| p * x).sum() };

    let mean_e = e.iter().sum::<f64>() / e.len() as f64;
    let lam = if (e_target - mean_e).abs() <= 1e-15 * width.max(1.0) {
        0.0
    } else {
        let mut lo = -1.0 / width;
        let mut hi = 1.0 / width;
        let mut grow = 0;
        while mean(lo) < e_target || mean(hi) > e_target {
            if mean(lo) < e_target {
                lo *= 2.0;
            }
            if mean(hi) > e_target {
                hi *= 2.0;
            }
            grow += 1;
            if grow > 2000 {
                return Err(Error::OutOfRange { value: e_target, min: lo_e, max: hi_e });
            }
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if mean(mid) > e_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let p = weights(lam);
    let m = eig.vectors.clone();
    let mut scaled = m.clone();
    for (j, &pj) in p.iter().enumerate() {
        scaled.column_mut(j).scale_mut(pj);
    }
    let rho = &scaled * m.adjoint();
    let state = StateOperator::new(LinOp::new(h.space().clone(), rho)?)?;
    Ok((state, lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random, HilbertSpace, Ket, SpinOps, Tensor, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(d: usize) -> HilbertSpace {
        HilbertSpace::single("a", d).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pure = StateOperator::pure(&random::ket(&mut rng, space(3))).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-10);
        let mixed = StateOperator::maximally_mixed(space(2));
        assert!((von_neumann_entropy(&mixed) - 2f64.ln()).abs() < 1e-14);
        // R_m = (1/2)^{m+1} at ν = 3, truncated deep enough that the tail is negligible
        let n = 60;
        let mut diag: Vec<f64> = (0..n).map(|m| 0.5f64.powi(m as i32 + 1)).collect();
        let tail: f64 = 1.0 - diag.iter().sum::<f64>();
        diag[n - 1] += tail;
        let t = StateOperator::new(LinOp::from_real_diagonal(space(n), &diag).unwrap()).unwrap();
        assert!((von_neumann_entropy(&t) - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn variance_examples() {
        let s = SpinOps::half(1.0);
        let plus = Ket::basis(s.space().clone(), 0).unwrap();
        let minus = Ket::basis(s.space().clone(), 1).unwrap();
        let sup = plus.add(&minus).unwrap().normalized().unwrap();
        let t = StateOperator::pure(&sup).unwrap();
        assert!((variance(&s.s3, &t).unwrap() - 0.5).abs() < 1e-15);
        let eig = StateOperator::pure(&plus).unwrap();
        assert_eq!(variance(&s.s3, &eig).unwrap(), 0.0);
    }

    #[test]
    fn correlation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::hermitian(&mut rng, space(3));
        let t = random::state(&mut rng, space(3));
        assert!((normalized_correlation(&a, &a, &t).unwrap() - 1.0).abs() < 1e-12);

        let t1 = random::state(&mut rng, space(2));
        let t2 = random::state(&mut rng, space(3));
        let a1 = random::hermitian(&mut rng, space(2));
        let a2 = random::hermitian(&mut rng, space(3));
        let w = t1.tensor(&t2).unwrap();
        let big_a = a1.tensor(&LinOp::identity(space(3))).unwrap();
        let big_b = LinOp::identity(space(2)).tensor(&a2).unwrap();
        assert!(normalized_correlation(&big_a, &big_b, &w).unwrap().abs() < 1e-12);

        let s = SpinOps::half(1.0);
        assert!(matches!(
            normalized_correlation(&s.s1, &s.s2, &StateOperator::maximally_mixed(space(2))),
            Err(Error::NonCommuting(_))
        ));
        let pure = StateOperator::pure(&Ket::basis(space(3), 0).unwrap()).unwrap();
        let diag = LinOp::from_real_diagonal(space(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(normalized_correlation(&diag, &diag, &pure), Err(Error::ZeroVariance));
    }

    #[test]
    fn gibbs_examples() {
        let h = LinOp::from_real_diagonal(space(2), &[0.0, 1.0]).unwrap();
        let (t, lam) = gibbs_state(&h, 0.25).unwrap();
        // independent: p1 = e^{-λ}/(1+e^{-λ}) = 1/4  ⇒  e^{λ} = 3
        assert!((lam - 3f64.ln()).abs() < 1e-12);
        assert!((t.matrix()[(1, 1)].re - 0.25).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random::hermitian(&mut rng, space(4));
        let (t, lam) = gibbs_state(&h, h.trace().re / 4.0).unwrap();
        assert_eq!(lam, 0.0);
        assert!(crate::hilbert::linop::max_abs(&(t.matrix() - StateOperator::maximally_mixed(space(4)).matrix())) < 1e-12);

        let e = h.eigh().unwrap().values;
        assert!(gibbs_state(&h, e[0] - 0.1).is_err());
        assert!(gibbs_state(&h, e[3]).is_err());
        assert!(gibbs_state(&h, e[0]).is_err());
        let _ = C64::new(0.0, 0.0);
    }

    #[test]
    fn gibbs_hits_extreme_targets() {
        let h = LinOp::from_real_diagonal(space(3), &[0.0, 1.0, 50.0]).unwrap();
        for target in [1e-6, 0.9, 30.0, 50.0 - 1e-6] {
            let (t, _) = gibbs_state(&h, target).unwrap();
            assert!((t.expectation_real(&h).unwrap() - target).abs() < 1e-9);
        }
    }
}
