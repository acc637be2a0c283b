//! Time evolution of ME packets under potentials of at most second order:
//! closed-form moment trajectories, a Monte Carlo classical oracle and a
//! truncated-Fock quantum oracle.

mod fock_oracle;
mod mc;

pub use fock_oracle::{fock_quantum_oracle, fock_sizing, FockOracleReport, FOCK_TOL};
pub use mc::{mc_classical_oracle, Flow, McTrajectory, StandardErrors, MIN_SAMPLES};

use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::mepacket::MEPacketParams;
use crate::scalar::Real;
use std::path::Path;

/// `V(q) = V0 + V1 q + V2 q²/2` with mass `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticPotential<T: Real = f64> {
    pub v0: T,
    pub v1: T,
    pub v2: T,
    pub mu: T,
}

impl<T: Real> QuadraticPotential<T> {
    pub fn new(v0: T, v1: T, v2: T, mu: T) -> Result<Self> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mu}")));
        }
        Ok(Self { v0, v1, v2, mu })
    }

    pub fn free(mu: T) -> Result<Self> {
        Self::new(T::zero(), T::zero(), T::zero(), mu)
    }

    pub fn harmonic(mu: T, v2: T) -> Result<Self> {
        Self::new(T::zero(), T::zero(), v2, mu)
    }

    pub fn value(&self, q: T) -> T {
        self.v0 + self.v1 * q + T::lit(0.5) * self.v2 * q * q
    }

    /// `−dV/dq`
    pub fn force(&self, q: T) -> T {
        -(self.v1 + self.v2 * q)
    }

    /// `ξ = √(μ|V2|)`
    pub fn xi(&self) -> T {
        (self.mu * self.v2.abs()).sqrt()
    }

    /// `ω = √(|V2|/μ)`
    pub fn omega(&self) -> T {
        (self.v2.abs() / self.mu).sqrt()
    }
}

/// `q(t) = f0 + q f1 + p f2`, `p(t) = g0 + q g1 + p g2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionCoeffs<T: Real = f64> {
    pub f0: T,
    pub f1: T,
    pub f2: T,
    pub g0: T,
    pub g1: T,
    pub g2: T,
}

impl<T: Real> EvolutionCoeffs<T> {
    /// `f1 g2 − f2 g1`, equal to 1 for every Hamiltonian flow.
    pub fn determinant(&self) -> T {
        self.f1 * self.g2 - self.f2 * self.g1
    }

    pub fn apply(&self, q: T, p: T) -> (T, T) {
        (self.f0 + q * self.f1 + p * self.f2, self.g0 + q * self.g1 + p * self.g2)
    }
}

/// Exact flow coefficients at time `t`. `V2 < 0` continues the
/// trigonometric forms to hyperbolic ones.
pub fn evolution_coeffs<T: Real>(pot: &QuadraticPotential<T>, t: T) -> EvolutionCoeffs<T> {
    let mu = pot.mu;
    let two = T::lit(2.0);
    if pot.v2 == T::zero() {
        return EvolutionCoeffs {
            f0: -pot.v1 * t * t / (two * mu),
            f1: T::one(),
            f2: t / mu,
            g0: -pot.v1 * t,
            g1: T::zero(),
            g2: T::one(),
        };
    }
    let w = pot.omega();
    let xi = pot.xi();
    let wt = w * t;
    // −(V1/V2)(1 − cos ωt) written as −(V1/μ)·2 sin²(ωt/2)/ω², free of cancellation for small V2
    if pot.v2 > T::zero() {
        let (s, c) = wt.sin_cos();
        let h = (wt / two).sin();
        EvolutionCoeffs {
            f0: -pot.v1 / mu * two * h * h / (w * w),
            f1: c,
            f2: s / xi,
            g0: -xi * pot.v1 / pot.v2 * s,
            g1: -xi * s,
            g2: c,
        }
    } else {
        let (s, c) = (wt.sinh(), wt.cosh());
        let h = (wt / two).sinh();
        EvolutionCoeffs {
            f0: -pot.v1 / mu * two * h * h / (w * w),
            f1: c,
            f2: s / xi,
            g0: xi * pot.v1 / pot.v2 * s,
            g1: xi * s,
            g2: c,
        }
    }
}

/// Averages and standard deviations of `q` and `p` on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTrajectory<T: Real = f64> {
    pub times: Vec<T>,
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub dq: Vec<T>,
    pub dp: Vec<T>,
}

impl<T: Real> MomentTrajectory<T> {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            dq: Vec::with_capacity(n),
            dp: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: T, q: T, p: T, dq: T, dp: T) {
        self.times.push(t);
        self.q.push(q);
        self.p.push(p);
        self.dq.push(dq);
        self.dp.push(dp);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `ν(t) = 2ΔQ(t)ΔP(t)/ħ`
    pub fn nu(&self, hbar: T) -> Vec<T> {
        self.dq.iter().zip(&self.dp).map(|(a, b)| T::lit(2.0) * *a * *b / hbar).collect()
    }

    /// Largest absolute difference over the four curves.
    pub fn max_abs_diff(&self, other: &MomentTrajectory<T>) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        let mut m = T::zero();
        for (a, b) in [(&self.q, &other.q), (&self.p, &other.p), (&self.dq, &other.dq), (&self.dp, &other.dp)] {
            for (x, y) in a.iter().zip(b) {
                m = m.max((*x - *y).abs());
            }
        }
        Ok(m)
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                [self.times[i], self.q[i], self.p[i], self.dq[i], self.dp[i]].iter().map(|x| x.to_f64_lossy()).collect()
            })
            .collect()
    }

    /// Columns `t, Q, P, dQ, dP`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        write_csv(path, &["t", "Q", "P", "dQ", "dP"], &self.rows())
    }
}

pub(crate) fn require_sorted<T: Real>(times: &[T]) -> Result<()> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("times must be sorted".into()));
    }
    Ok(())
}

/// Moments of the evolved packet from the flow coefficients:
/// `Q(t) = f0 + Qf1 + Pf2`, `ΔQ(t) = √(f1²ΔQ² + f2²ΔP²)` and likewise for `p`.
pub fn closed_form_trajectory<T: Real>(
    params: &MEPacketParams<T>,
    pot: &QuadraticPotential<T>,
    times: &[T],
) -> Result<MomentTrajectory<T>> {
    require_sorted(times)?;
    let (vq, vp) = (params.dq * params.dq, params.dp * params.dp);
    let mut out = MomentTrajectory::with_capacity(times.len());
    for &t in times {
        let c = evolution_coeffs(pot, t);
        let (q, p) = c.apply(params.q, params.p);
        let dq = (c.f1 * c.f1 * vq + c.f2 * c.f2 * vp).sqrt();
        let dp = (c.g1 * c.g1 * vq + c.g2 * c.g2 * vp).sqrt();
        out.push(t, q, p, dq, dp);
    }
    Ok(out)
}

/// `n` equally spaced times on `[0, t_max]`, endpoints included.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coefficient_examples() {
        let free = QuadraticPotential::new(0.0, 0.7, 0.0, 1.0).unwrap();
        let c = evolution_coeffs(&free, 2.0);
        assert_eq!(c.f2, 2.0);
        assert_eq!(c.g0, -1.4);
        let osc = QuadraticPotential::harmonic(1.0, 1.0).unwrap();
        let c = evolution_coeffs(&osc, PI / 2.0);
        assert!(c.f1.abs() < 1e-15 && (c.f2 - 1.0).abs() < 1e-15);
        assert!((c.g1 + 1.0).abs() < 1e-15 && c.g2.abs() < 1e-15);
        for pot in [free, osc, QuadraticPotential::new(1.0, -0.3, -2.0, 0.5).unwrap()] {
            let c = evolution_coeffs(&pot, 0.0);
            assert_eq!((c.f0, c.f1, c.f2, c.g0, c.g1, c.g2), (0.0, 1.0, 0.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn coefficients_solve_equations_of_motion() {
        // finite-difference check of q̇ = p/μ and ṗ = −V1 − V2 q for each branch
        for pot in [
            QuadraticPotential::new(0.0, 0.4, 1.7, 0.8).unwrap(),
            QuadraticPotential::new(0.0, 0.4, -1.7, 0.8).unwrap(),
            QuadraticPotential::new(0.0, 0.4, 0.0, 0.8).unwrap(),
        ] {
            let (q0, p0, t, h) = (0.3, -1.2, 0.9, 1e-5);
            let at = |s: f64| evolution_coeffs(&pot, s).apply(q0, p0);
            let (q, p) = at(t);
            let dq = (at(t + h).0 - at(t - h).0) / (2.0 * h);
            let dp = (at(t + h).1 - at(t - h).1) / (2.0 * h);
            assert!((dq - p / pot.mu).abs() < 1e-8, "{pot:?} {dq} {}", p / pot.mu);
            assert!((dp - pot.force(q)).abs() < 1e-8, "{pot:?} {dp} {}", pot.force(q));
        }
    }

    #[test]
    fn small_stiffness_approaches_polynomial_branch() {
        let a = evolution_coeffs(&QuadraticPotential::new(0.0_f64, 0.9, 1e-12, 1.3).unwrap(), 2.5);
        let b = evolution_coeffs(&QuadraticPotential::new(0.0, 0.9, 0.0, 1.3).unwrap(), 2.5);
        assert!((a.f0 - b.f0).abs() < 1e-9 && (a.f2 - b.f2).abs() < 1e-9);
    }

    #[test]
    fn trajectory_examples() {
        let params = MEPacketParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let osc = QuadraticPotential::harmonic(1.0, 1.0).unwrap();
        let tr = closed_form_trajectory(&params, &osc, &[0.0, PI / 2.0]).unwrap();
        assert_eq!((tr.q[0], tr.p[0], tr.dq[0], tr.dp[0]), (1.0, 0.0, 1.0, 1.0));
        assert!(tr.q[1].abs() < 1e-15 && (tr.p[1] + 1.0).abs() < 1e-15);
        assert!((tr.dq[1] - 1.0).abs() < 1e-15 && (tr.dp[1] - 1.0).abs() < 1e-15);
        let free = QuadraticPotential::free(1.0).unwrap();
        let tr = closed_form_trajectory(&params, &free, &[2.0]).unwrap();
        assert!((tr.dq[0] - 5f64.sqrt()).abs() < 1e-15);
        assert!(closed_form_trajectory(&params, &free, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn f32_trajectory() {
        let params = MEPacketParams::new(0.0f32, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let tr = closed_form_trajectory(&params, &QuadraticPotential::free(1.0f32).unwrap(), &[2.0]).unwrap();
        assert!((tr.dq[0] - 5f32.sqrt()).abs() < 1e-6);
    }
}
