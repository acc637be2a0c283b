//! Maximum-entropy packets: states of maximal entropy with prescribed
//! averages and variances of position and momentum.
//!
//! The closed forms (weights, partition functions, entropies, the
//! classical-limit deviation) are generic over [`Real`]. The quantum state
//! operator is assembled in `f64` in either a truncated oscillator basis or
//! on a position grid.

mod classical;
mod fock;
mod quantum;

pub use classical::ClassicalMEPacket;
pub use fock::FockBasis;
pub use quantum::{ground_wavefunction, hermite_functions, quantum_state, QuantumMEPacket, Representation};

use crate::error::{Error, Result};
use crate::scalar::{sinhc_m1, Real};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Geometric tail of the weights `R_m` left out by the adaptive cutoff.
pub const TAIL_TOL: f64 = 1e-12;

/// Averages and variances of one degree of freedom.
///
/// Several degrees of freedom are independent products of one-dof packets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MEPacketParams<T: Real = f64> {
    pub q: T,
    pub p: T,
    pub dq: T,
    pub dp: T,
    pub hbar: T,
    /// Classical phase-space volume unit.
    pub v: T,
}

impl<T: Real> MEPacketParams<T> {
    pub fn new(q: T, p: T, dq: T, dp: T, hbar: T, v: T) -> Result<Self> {
        for (name, x) in [("dQ", dq), ("dP", dp), ("hbar", hbar), ("v", v)] {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        if !q.is_finite() || !p.is_finite() {
            return Err(Error::InvalidParameter("Q and P must be finite".into()));
        }
        Ok(Self { q, p, dq, dp, hbar, v })
    }

    /// `ν = 2ΔPΔQ/ħ`
    pub fn nu(&self) -> T {
        T::lit(2.0) * self.dp * self.dq / self.hbar
    }

    /// `ν`, rejecting packets below the uncertainty bound. Values within
    /// rounding of 1 are snapped to 1.
    pub fn quantum_nu(&self) -> Result<T> {
        let nu = self.nu();
        if nu < T::one() - T::lit(1e-12) {
            return Err(Error::OutOfRange { value: nu.to_f64_lossy(), min: 1.0, max: f64::INFINITY });
        }
        if (nu - T::one()).abs() <= T::lit(1e-12) {
            return Ok(T::one());
        }
        Ok(nu)
    }

    /// Squared length of the oscillator whose ground state is the packet's
    /// `|0⟩`: `ħΔQ/ΔP`.
    pub fn k_length_sq(&self) -> T {
        self.hbar * self.dq / self.dp
    }
}

/// Ratio `(ν−1)/(ν+1)` of consecutive weights.
pub fn weight_ratio<T: Real>(nu: T) -> T {
    (nu - T::one()) / (nu + T::one())
}

/// `R_m = 2(ν−1)^m/(ν+1)^{m+1}`
pub fn weight<T: Real>(nu: T, m: usize) -> T {
    let two = T::lit(2.0);
    two / (nu + T::one()) * weight_ratio(nu).powi(m as i32)
}

/// `R_0 … R_M`
pub fn weights<T: Real>(nu: T, max_index: usize) -> Vec<T> {
    let r = weight_ratio(nu);
    let mut w = Vec::with_capacity(max_index + 1);
    let mut cur = T::lit(2.0) / (nu + T::one());
    for _ in 0..=max_index {
        w.push(cur);
        cur = cur * r;
    }
    w
}

/// `Σ_{m>M} R_m = r^{M+1}`
pub fn weight_tail<T: Real>(nu: T, max_index: usize) -> T {
    weight_ratio(nu).powi(max_index as i32 + 1)
}

/// Smallest `M` with `((ν−1)/(ν+1))^{M+1} < TAIL_TOL`.
pub fn adaptive_cutoff<T: Real>(nu: T) -> usize {
    let r = weight_ratio(nu).to_f64_lossy();
    if r <= 0.0 {
        return 0;
    }
    let mut m = (TAIL_TOL.ln() / r.ln()).floor().max(1.0) as usize - 1;
    while m > 0 && weight_tail(nu, m - 1).to_f64_lossy() < TAIL_TOL {
        m -= 1;
    }
    while weight_tail(nu, m).to_f64_lossy() >= TAIL_TOL {
        m += 1;
    }
    m
}

/// `tr[T²] = Σ R_m² = 1/ν`
pub fn quantum_purity<T: Real>(nu: T) -> T {
    T::one() / nu
}

/// von Neumann entropy of the quantum packet,
/// `((ν+1)/2) ln((ν+1)/2) − ((ν−1)/2) ln((ν−1)/2)`.
pub fn quantum_entropy<T: Real>(nu: T) -> T {
    let half = T::lit(0.5);
    let a = (nu + T::one()) * half;
    let b = (nu - T::one()) * half;
    let blnb = if b > T::zero() { b * b.ln() } else { T::zero() };
    a * a.ln() - blnb
}

/// Entropy of the classical density, `1 + ln(2πΔQΔP/v)`.
pub fn classical_entropy<T: Real>(params: &MEPacketParams<T>) -> T {
    T::one() + (T::lit(2.0) * T::PI() * params.dq * params.dp / params.v).ln()
}

fn require_positive_multipliers<T: Real>(l: &[T; 4]) -> Result<()> {
    if !(l[2] > T::zero()) || !(l[3] > T::zero()) {
        return Err(Error::InvalidParameter(format!("λ3 and λ4 must be positive, got {} and {}", l[2], l[3])));
    }
    Ok(())
}

fn linear_exponent<T: Real>(l: &[T; 4]) -> T {
    let four = T::lit(4.0);
    l[0] * l[0] / (four * l[2]) + l[1] * l[1] / (four * l[3])
}

/// `Z = (π/v)(λ3λ4)^{−1/2} exp(λ1²/4λ3 + λ2²/4λ4)` for the weight
/// `exp(−λ1q − λ2p − λ3q² − λ4p²)`.
pub fn classical_partition<T: Real>(l: [T; 4], v: T) -> Result<T> {
    require_positive_multipliers(&l)?;
    Ok(T::PI() / v / (l[2] * l[3]).sqrt() * linear_exponent(&l).exp())
}

/// `Z = exp(λ1²/4λ3 + λ2²/4λ4) / (2 sinh(ħ√(λ3λ4)))`
pub fn quantum_partition<T: Real>(l: [T; 4], hbar: T) -> Result<T> {
    require_positive_multipliers(&l)?;
    let x = hbar * (l[2] * l[3]).sqrt();
    Ok(linear_exponent(&l).exp() / (T::lit(2.0) * x.sinh()))
}

/// Multipliers `(λ1, λ2, λ3, λ4)` of the classical packet.
pub fn classical_multipliers<T: Real>(params: &MEPacketParams<T>) -> [T; 4] {
    let two = T::lit(2.0);
    let (vq, vp) = (params.dq * params.dq, params.dp * params.dp);
    [-params.q / vq, -params.p / vp, T::one() / (two * vq), T::one() / (two * vp)]
}

/// Multipliers of the quantum packet; `T ∝ exp(−λ1q − λ2p − λ3q² − λ4p²)`.
/// Requires `ν > 1`.
pub fn quantum_multipliers<T: Real>(params: &MEPacketParams<T>) -> Result<[T; 4]> {
    let nu = params.quantum_nu()?;
    if nu <= T::one() {
        return Err(Error::InvalidParameter("multipliers diverge at ν = 1".into()));
    }
    let x = limit_argument(nu)?;
    let two = T::lit(2.0);
    let l3 = x * params.dp / (params.hbar * params.dq);
    let l4 = x * params.dq / (params.hbar * params.dp);
    Ok([-two * l3 * params.q, -two * l4 * params.p, l3, l4])
}

/// `x = ħ√(λ3λ4) = ½ ln((ν+1)/(ν−1))`
pub fn limit_argument<T: Real>(nu: T) -> Result<T> {
    if !(nu > T::one()) {
        return Err(Error::OutOfRange { value: nu.to_f64_lossy(), min: 1.0, max: f64::INFINITY });
    }
    // ½ ln((ν+1)/(ν−1)) = artanh(1/ν)
    Ok((T::one() / nu).atanh())
}

/// `Z_cl(v = 2πħ)/Z_q − 1 = sinh(x)/x − 1`
pub fn limit_deviation<T: Real>(nu: T) -> Result<T> {
    Ok(sinhc_m1(limit_argument(nu)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalLimitRow {
    pub nu: f64,
    pub x: f64,
    pub deviation: f64,
    /// Leading large-`ν` behaviour `1/(6ν²)`.
    pub asymptote: f64,
    /// `deviation / asymptote`, tending to 1.
    pub ratio: f64,
}

pub fn classical_limit_report(nus: &[f64]) -> Result<Vec<ClassicalLimitRow>> {
    nus.iter()
        .map(|&nu| {
            let x = limit_argument(nu)?;
            let deviation = limit_deviation(nu)?;
            let asymptote = 1.0 / (6.0 * nu * nu);
            Ok(ClassicalLimitRow { nu, x, deviation, asymptote, ratio: deviation / asymptote })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PacketFile {
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "dQ")]
    dq: f64,
    #[serde(rename = "dP")]
    dp: f64,
    hbar: f64,
    #[serde(default = "default_v")]
    v: f64,
}

fn default_v() -> f64 {
    2.0 * std::f64::consts::PI
}

impl MEPacketParams<f64> {
    /// Parses `key = value` lines with keys `Q, P, dQ, dP, hbar` and
    /// optional `v` (default `2π`, i.e. `h` for `ħ = 1`).
    pub fn from_text(text: &str) -> Result<Self> {
        let f: PacketFile = toml::from_str(text)?;
        Self::new(f.q, f.p, f.dq, f.dp, f.hbar, f.v)
    }

    pub fn to_text(&self) -> String {
        use crate::io::fmt_num;
        format!(
            "Q = {}\nP = {}\ndQ = {}\ndP = {}\nhbar = {}\nv = {}\n# nu = {}\n",
            fmt_num(self.q),
            fmt_num(self.p),
            fmt_num(self.dq),
            fmt_num(self.dp),
            fmt_num(self.hbar),
            fmt_num(self.v),
            fmt_num(self.nu())
        )
    }

    pub fn read<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_at_nu_three() {
        let w = weights(3.0_f64, 4);
        for (m, want) in [0.5, 0.25, 0.125, 0.0625, 0.03125].iter().enumerate() {
            assert!((w[m] - want).abs() < 1e-15);
            assert!((weight(3.0, m) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_at_nu_one_are_delta() {
        let w = weights(1.0_f64, 3);
        assert_eq!(w, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(adaptive_cutoff(1.0_f64), 0);
    }

    #[test]
    fn adaptive_cutoff_is_smallest() {
        for nu in [1.5_f64, 2.0, 3.0, 10.0, 100.0] {
            let m = adaptive_cutoff(nu);
            assert!(weight_tail(nu, m) < TAIL_TOL);
            assert!(m == 0 || weight_tail(nu, m - 1) >= TAIL_TOL);
        }
    }

    #[test]
    fn entropy_and_purity_closed_forms() {
        let nu = 3.0_f64;
        let w = weights(nu, adaptive_cutoff(nu) + 40);
        let s: f64 = w.iter().map(|&r| -crate::hilbert::xlnx(r)).sum();
        assert!((s - 2.0 * 2f64.ln()).abs() < 1e-10);
        assert!((quantum_entropy(nu) - s).abs() < 1e-10);
        let pur: f64 = w.iter().map(|r| r * r).sum();
        assert!((pur - quantum_purity(nu)).abs() < 1e-12);
        assert_eq!(quantum_entropy(1.0_f64), 0.0);
    }

    #[test]
    fn partition_examples() {
        let z = classical_partition([0.0_f64, 0.0, 1.0, 1.0], 1.0).unwrap();
        assert!((z - std::f64::consts::PI).abs() < 1e-15);
        assert!(classical_partition([0.0_f64, 0.0, 0.0, 1.0], 1.0).is_err());
        assert!(quantum_partition([0.0_f64, 0.0, 1.0, -1.0], 1.0).is_err());
        let a = classical_partition([0.3_f64, -0.7, 1.3, 0.4], 2.0).unwrap();
        let b = classical_partition([-0.7_f64, 0.3, 0.4, 1.3], 2.0).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn limit_examples() {
        let x = limit_argument(3.0_f64).unwrap();
        assert!((x - 0.5 * 2f64.ln()).abs() < 1e-15);
        let d3 = limit_deviation(3.0_f64).unwrap();
        let x = 0.5 * 2f64.ln();
        assert!((d3 - (x.sinh() / x - 1.0)).abs() < 1e-15);
        assert!(d3 > 0.0201 && d3 < 0.021, "{d3}");
        assert!(limit_deviation(100.0_f64).unwrap() < 2e-5);
        assert!(limit_deviation(1.0_f64).is_err());
        assert!(limit_deviation(1.0 + 1e-9_f64).unwrap() > 1e3);
        let d32 = limit_deviation(3.0_f32).unwrap();
        assert!((d32 as f64 - d3).abs() < 1e-5);
    }

    #[test]
    fn matched_multipliers_give_sinhc_ratio() {
        let params = MEPacketParams::new(0.4, -1.1, 2.0, 1.5, 1.0, 2.0 * std::f64::consts::PI).unwrap();
        let l = quantum_multipliers(&params).unwrap();
        let x = 1.0 * (l[2] * l[3]).sqrt();
        assert!((x - limit_argument(params.nu()).unwrap()).abs() < 1e-14);
        let ratio = classical_partition(l, params.v).unwrap() / quantum_partition(l, params.hbar).unwrap();
        assert!((ratio - x.sinh() / x).abs() < 1e-12);
    }

    #[test]
    fn quantum_nu_bounds() {
        let ok = MEPacketParams::new(0.0, 0.0, 0.5f64.sqrt(), 0.5f64.sqrt(), 1.0, 1.0).unwrap();
        assert_eq!(ok.quantum_nu().unwrap(), 1.0);
        let bad = MEPacketParams::new(0.0, 0.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(bad.quantum_nu().is_err());
        assert!(MEPacketParams::new(0.0, 0.0, -1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn parameter_file_roundtrip() {
        let p = MEPacketParams::new(1.25, -0.5, 0.75, 2.0, 1.0, 3.0).unwrap();
        let back = MEPacketParams::from_text(&p.to_text()).unwrap();
        assert_eq!(p, back);
        let d = MEPacketParams::from_text("Q = 0\nP = 0\ndQ = 1\ndP = 1\nhbar = 1\n").unwrap();
        assert!((d.nu() - 2.0).abs() < 1e-15);
        assert!(MEPacketParams::from_text("Q = 0\nP = 0\ndQ = 1\ndP = 1\nhbar = 1\nmass = 2\n").is_err());
    }
}
