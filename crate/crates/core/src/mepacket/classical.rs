use super::{classical_entropy, MEPacketParams};
use crate::error::Result;
use crate::scalar::Real;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Classical maximum-entropy density on phase space, normalized with respect
/// to `dq dp / v`.
#[derive(Clone, Copy, Debug)]
pub struct ClassicalMEPacket<T: Real = f64> {
    params: MEPacketParams<T>,
}

impl<T: Real> ClassicalMEPacket<T> {
    pub fn new(params: MEPacketParams<T>) -> Result<Self> {
        let p = params;
        MEPacketParams::new(p.q, p.p, p.dq, p.dp, p.hbar, p.v)?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &MEPacketParams<T> {
        &self.params
    }

    /// `ρ(q,p) = (v/2π)(1/ΔQΔP) exp[−(q−Q)²/2ΔQ² − (p−P)²/2ΔP²]`
    pub fn density(&self, q: T, p: T) -> T {
        let s = &self.params;
        let two = T::lit(2.0);
        let a = (q - s.q) / s.dq;
        let b = (p - s.p) / s.dp;
        s.v / (two * T::PI() * s.dq * s.dp) * (-(a * a + b * b) / two).exp()
    }

    /// `(⟨q⟩, ⟨p⟩, ⟨(q−Q)²⟩, ⟨(p−P)²⟩)`
    pub fn moments(&self) -> (T, T, T, T) {
        let s = &self.params;
        (s.q, s.p, s.dq * s.dq, s.dp * s.dp)
    }

    pub fn entropy(&self) -> T {
        classical_entropy(&self.params)
    }

    /// Draws `n` phase-space points `(q, p)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(T, T)>
    where
        StandardNormal: Distribution<T>,
    {
        let s = &self.params;
        (0..n)
            .map(|_| {
                let a: T = rng.sample(StandardNormal);
                let b: T = rng.sample(StandardNormal);
                (s.q + s.dq * a, s.p + s.dp * b)
            })
            .collect()
    }
}
