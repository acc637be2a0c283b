//! Linear chain of `N` equal masses with nearest-neighbour springs:
//! normal modes, phonon spectrum and Gibbs-state length statistics.

mod oracle;

pub use oracle::{coupling_matrix, gibbs_length_variance};

use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::scalar::{coth, Real};
use nalgebra::DMatrix;
use std::path::Path;

/// `H = Σ p_n²/2μ + (κ²/2) Σ (x_n − x_{n−1} − ξ)²` in a Gibbs state with
/// multiplier `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams<T: Real = f64> {
    pub n: usize,
    pub mu: T,
    pub kappa: T,
    pub xi: T,
    pub lambda: T,
    pub hbar: T,
}

impl<T: Real> ChainParams<T> {
    pub fn new(n: usize, mu: T, kappa: T, xi: T, lambda: T, hbar: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("chain needs at least 2 particles, got {n}")));
        }
        for (name, v) in [("mu", mu), ("kappa", kappa), ("xi", xi), ("lambda", lambda), ("hbar", hbar)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { n, mu, kappa, xi, lambda, hbar })
    }

    /// All structural constants and `λ`, `ħ` equal to one.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, T::one(), T::one(), T::one(), T::one(), T::one())
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::new(n, self.mu, self.kappa, self.xi, self.lambda, self.hbar)
    }

    pub fn with_lambda(self, lambda: T) -> Result<Self> {
        Self::new(self.n, self.mu, self.kappa, self.xi, lambda, self.hbar)
    }
}

/// `Y[m, n−1] = A(m)·cos[πm(n − (N+1)/2)/N]` for even `m`, `sin` for odd `m`,
/// with `A(0) = 1/√N` and `A(m) = √(2/N)` otherwise. Rows are modes.
pub fn mode_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("chain needs at least 2 particles, got {n}")));
    }
    let nf = n as f64;
    let centre = (nf + 1.0) / 2.0;
    Ok(DMatrix::from_fn(n, n, |m, j| {
        let a = if m == 0 { 1.0 / nf.sqrt() } else { (2.0 / nf).sqrt() };
        let arg = std::f64::consts::PI * m as f64 / nf * (j as f64 + 1.0 - centre);
        if m % 2 == 0 { a * arg.cos() } else { a * arg.sin() }
    }))
}

/// `ω_m = (2κ/√μ) sin(mπ/2N)`, `m = 0 … N−1`.
pub fn mode_frequencies<T: Real>(n: usize, kappa: T, mu: T) -> Vec<T> {
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    (0..n)
        .map(|m| two * kappa / mu.sqrt() * (T::from_usize_lossy(m) * T::PI() / (two * nf)).sin())
        .collect()
}

/// Coefficients of `u_m` in `L − (N−1)ξ`, i.e. `Y^m_N − Y^m_1`.
pub fn length_coefficients(n: usize) -> Result<Vec<f64>> {
    let y = mode_matrix(n)?;
    Ok((0..n).map(|m| y[(m, n - 1)] - y[(m, 0)]).collect())
}

/// `⟨u_m²⟩ = (ħ/2μω) coth(λħω/2)` in the Gibbs state of one phonon species.
pub fn mode_variance<T: Real>(omega: T, p: &ChainParams<T>) -> T {
    let two = T::lit(2.0);
    p.hbar / (two * p.mu * omega) * coth(p.lambda * p.hbar * omega / two)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport<T: Real = f64> {
    pub omega: Vec<T>,
    pub l_avg: T,
    pub dl: T,
    /// `ΔL/⟨L⟩`
    pub ratio: T,
    /// `2√3/(πκξ√λ)·N^{−1/2}`
    pub asymptote: T,
}

/// `⟨L⟩ = (N−1)ξ` and
/// `ΔL² = (8/N) Σ_{m=1}^{⌊N/2⌋} cos²((2m−1)π/2N) ⟨u_{2m−1}²⟩`.
pub fn length_statistics<T: Real>(p: &ChainParams<T>) -> ChainReport<T> {
    let n = p.n;
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let omega = mode_frequencies(n, p.kappa, p.mu);
    let mut var = T::zero();
    for m in 1..=n / 2 {
        let k = 2 * m - 1;
        let c = ((two * T::from_usize_lossy(m) - T::one()) * T::PI() / (two * nf)).cos();
        var = var + c * c * mode_variance(omega[k], p);
    }
    let dl = (T::lit(8.0) / nf * var).sqrt();
    let l_avg = (nf - T::one()) * p.xi;
    ChainReport { asymptote: asymptote(p), ratio: dl / l_avg, omega, l_avg, dl }
}

/// Large-`N` form `2√3/(πκξ√λ)·N^{−1/2}` of `ΔL/⟨L⟩`.
pub fn asymptote<T: Real>(p: &ChainParams<T>) -> T {
    let nf = T::from_usize_lossy(p.n);
    T::lit(2.0) * T::lit(3.0).sqrt() / (T::PI() * p.kappa * p.xi * p.lambda.sqrt() * nf.sqrt())
}

/// Thermal phonon energy `Σ_{m≥1} ħω_m/(e^{λħω_m} − 1)`.
pub fn internal_energy<T: Real>(p: &ChainParams<T>) -> T {
    mode_frequencies(p.n, p.kappa, p.mu)
        .into_iter()
        .skip(1)
        .map(|w| p.hbar * w / (p.lambda * p.hbar * w).exp_m1())
        .fold(T::zero(), |a, b| a + b)
}

/// `ΔE² = Σ_{m≥1} (ħω_m)² n̄_m(n̄_m + 1)`.
pub fn energy_variance<T: Real>(p: &ChainParams<T>) -> T {
    mode_frequencies(p.n, p.kappa, p.mu)
        .into_iter()
        .skip(1)
        .map(|w| {
            let e = p.hbar * w;
            let nb = T::one() / (p.lambda * e).exp_m1();
            e * e * nb * (nb + T::one())
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Multiplier `λ` whose Gibbs state has thermal energy `e_target`, by
/// bisection in `ln λ` on the decreasing map `λ ↦ E(λ)`.
pub fn solve_lambda(p: &ChainParams<f64>, e_target: f64) -> Result<f64> {
    if !(e_target > 0.0) || !e_target.is_finite() {
        return Err(Error::InvalidParameter(format!("target energy must be positive, got {e_target}")));
    }
    let energy = |l: f64| internal_energy(&ChainParams { lambda: l, ..*p });
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while energy(lo) < e_target {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::OutOfRange { value: e_target, min: 0.0, max: energy(lo) });
        }
    }
    while energy(hi) > e_target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::OutOfRange { value: e_target, min: energy(hi), max: f64::INFINITY });
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if energy(mid) > e_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub l_avg: f64,
    pub dl: f64,
    pub ratio: f64,
    pub asymptote: f64,
    /// `ratio/asymptote − 1`
    pub rel_err: f64,
}

pub fn scaling_study(base: &ChainParams<f64>, ns: &[usize]) -> Result<Vec<ScalingRow>> {
    ns.iter()
        .map(|&n| {
            let r = length_statistics(&base.with_n(n)?);
            Ok(ScalingRow { n, l_avg: r.l_avg, dl: r.dl, ratio: r.ratio, asymptote: r.asymptote, rel_err: r.ratio / r.asymptote - 1.0 })
        })
        .collect()
}

/// Least-squares slope of `ln(ΔL/⟨L⟩)` against `ln N`.
pub fn scaling_slope(rows: &[ScalingRow]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::InvalidParameter("slope needs at least two chain sizes".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Columns `N, L_avg, dL, ratio, asymptote, rel_err`.
pub fn write_scaling_csv<P: AsRef<Path>>(path: P, rows: &[ScalingRow]) -> Result<()> {
    let data: Vec<Vec<f64>> =
        rows.iter().map(|r| vec![r.n as f64, r.l_avg, r.dl, r.ratio, r.asymptote, r.rel_err]).collect();
    write_csv(path, &["N", "L_avg", "dL", "ratio", "asymptote", "rel_err"], &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_particle_modes() {
        let y = mode_matrix(2).unwrap();
        let s = 0.5f64.sqrt();
        let want = [[s, s], [-s, s]];
        for m in 0..2 {
            for j in 0..2 {
                assert!((y[(m, j)] - want[m][j]).abs() < 1e-15);
            }
        }
        let w = mode_frequencies(2, 1.0, 1.0);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_is_centre_of_mass() {
        let n = 7;
        let y = mode_matrix(n).unwrap();
        for j in 0..n {
            assert!((y[(0, j)] - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn average_length_example() {
        let r = length_statistics(&ChainParams::<f64>::unit(100).unwrap());
        assert_eq!(r.l_avg, 99.0);
        assert!(r.omega.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_mode_inversion() {
        let p = ChainParams::new(2, 1.3, 0.7, 1.0, 1.0, 0.9).unwrap();
        let hw = p.hbar * mode_frequencies(2, p.kappa, p.mu)[1];
        for e in [1e-3, 0.4, 7.0] {
            let lambda = solve_lambda(&p, e).unwrap();
            let exact = (1.0 + hw / e).ln() / hw;
            assert!((lambda / exact - 1.0).abs() < 1e-12, "{lambda} {exact}");
        }
        assert!(solve_lambda(&p, 0.0).is_err());
    }

    #[test]
    fn f32_statistics() {
        let r = length_statistics(&ChainParams::<f32>::unit(64).unwrap());
        let d = length_statistics(&ChainParams::<f64>::unit(64).unwrap());
        assert!((r.dl as f64 / d.dl - 1.0).abs() < 1e-5);
    }
}
