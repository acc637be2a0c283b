use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Labeled tensor-product structure of a finite-dimensional Hilbert space.
///
/// Basis indices are row-major over the factors: the first factor is the
/// most significant digit, matching the Kronecker product convention.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let (labels, dims): (Vec<String>, Vec<usize>) =
            factors.into_iter().map(|(l, d)| (l.into(), d)).unzip();
        if dims.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSpace(format!("factor {} has dimension 0", labels[pos])));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidSpace(format!("duplicate factor label {l:?}")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// Single factor space.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// `n` factors of equal dimension labeled `"{prefix}1"`, `"{prefix}2"`, ...
    pub fn uniform(prefix: &str, n: usize, dim: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| (format!("{prefix}{i}"), dim)))
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn factor_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Tensor product space. Labels of `other` that collide with existing
    /// ones get primes appended (`a` becomes `a'`).
    pub fn concat(&self, other: &HilbertSpace) -> Result<Self> {
        let mut labels = self.labels.clone();
        for l in &other.labels {
            let mut l = l.clone();
            while labels.contains(&l) {
                l.push('\'');
            }
            labels.push(l);
        }
        Self::new(labels.into_iter().zip(self.dims.iter().chain(other.dims.iter()).copied()))
    }

    /// Subspace built from the listed factors, in the listed order.
    pub fn select(&self, factors: &[usize]) -> Result<Self> {
        for &f in factors {
            if f >= self.n_factors() {
                return Err(Error::InvalidSpace(format!("factor index {f} out of range")));
            }
        }
        Self::new(factors.iter().map(|&f| (self.labels[f].clone(), self.dims[f])))
    }

    /// Same dimensions, fresh labels.
    pub fn relabel<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), got: labels.len() });
        }
        Self::new(labels.into_iter().zip(self.dims.iter().copied()))
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Decompose a flat basis index into per-factor indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            out[i] = flat % self.dims[i];
            flat /= self.dims[i];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.dims).fold(0, |acc, (&m, &d)| acc * d + m)
    }
}
