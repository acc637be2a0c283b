use super::{CMatrix, HilbertSpace, LinOp, C64};
use crate::error::{Error, Result};

/// Exchange symmetry of identical particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// Bosons, `ε = +1`.
    Symmetric,
    /// Fermions, `ε = −1`.
    Antisymmetric,
}

impl Symmetry {
    pub fn epsilon(self) -> f64 {
        match self {
            Symmetry::Symmetric => 1.0,
            Symmetry::Antisymmetric => -1.0,
        }
    }

    pub fn from_epsilon(eps: i32) -> Result<Self> {
        match eps {
            1 => Ok(Symmetry::Symmetric),
            -1 => Ok(Symmetry::Antisymmetric),
            _ => Err(Error::InvalidParameter(format!("statistics sign must be ±1, got {eps}"))),
        }
    }

    /// Weight `ε^π` of a permutation with the given parity.
    pub fn weight(self, odd: bool) -> f64 {
        if odd && self == Symmetry::Antisymmetric {
            -1.0
        } else {
            1.0
        }
    }
}

/// All permutations of `0..n` (Heap's algorithm) paired with their parity (`true` = odd).
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![(perm.clone(), false)];
    let mut c = vec![0usize; n];
    let mut odd = false;
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            odd = !odd;
            out.push((perm.clone(), odd));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn require_uniform(space: &HilbertSpace) -> Result<usize> {
    let d = space.dims()[0];
    if let Some(&bad) = space.dims().iter().find(|&&x| x != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad });
    }
    Ok(d)
}

/// `U_π`, which moves the particle in slot `k` to slot `perm[k]`.
pub fn permutation_operator(space: &HilbertSpace, perm: &[usize]) -> Result<LinOp> {
    require_uniform(space)?;
    let n = space.n_factors();
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter(format!("not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    let mut target = vec![0usize; n];
    for col in 0..dim {
        let idx = space.multi_index(col);
        for k in 0..n {
            target[perm[k]] = idx[k];
        }
        m[(space.flat_index(&target), col)] = C64::new(1.0, 0.0);
    }
    LinOp::new(space.clone(), m)
}

/// `(1/n!) Σ_π ε^π U_π` on `space`, whose factors must share one dimension.
pub fn symmetrizer_on(space: &HilbertSpace, kind: Symmetry) -> Result<LinOp> {
    require_uniform(space)?;
    let n = space.n_factors();
    let perms = permutations(n);
    let norm = 1.0 / perms.len() as f64;
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    let mut target = vec![0usize; n];
    for (perm, odd) in &perms {
        let w = C64::new(kind.weight(*odd) * norm, 0.0);
        for col in 0..dim {
            let idx = space.multi_index(col);
            for k in 0..n {
                target[perm[k]] = idx[k];
            }
            m[(space.flat_index(&target), col)] += w;
        }
    }
    LinOp::new(space.clone(), m)
}

/// Symmetrizer on `n_factors` copies of a `dim`-dimensional space.
pub fn symmetrizer(n_factors: usize, dim: usize, kind: Symmetry) -> Result<LinOp> {
    symmetrizer_on(&HilbertSpace::uniform("p", n_factors, dim)?, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random, Ket, Tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heap_generates_all_with_parity() {
        let ps = permutations(4);
        assert_eq!(ps.len(), 24);
        let mut uniq: Vec<_> = ps.iter().map(|p| p.0.clone()).collect();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 24);
        for (p, odd) in &ps {
            let mut inversions = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            assert_eq!(inversions % 2 == 1, *odd);
        }
    }

    #[test]
    fn antisymmetrizer_kills_equal_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random::ket(&mut rng, HilbertSpace::single("a", 3).unwrap());
        let pp = psi.tensor(&psi).unwrap();
        let pa = symmetrizer(2, 3, Symmetry::Antisymmetric).unwrap();
        assert!(pa.apply(&pp).unwrap().norm() < 1e-14);
    }

    #[test]
    fn symmetrizer_averages_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = HilbertSpace::single("a", 3).unwrap();
        let psi = random::ket(&mut rng, s.clone());
        let phi = random::ket(&mut rng, s);
        let ps = symmetrizer(2, 3, Symmetry::Symmetric).unwrap();
        let got = ps.apply(&psi.tensor(&phi).unwrap()).unwrap();
        let a = psi.tensor(&phi).unwrap();
        let b = phi.tensor(&psi).unwrap();
        for i in 0..9 {
            let want = (a.amplitudes()[i] + b.amplitudes()[i]) * 0.5;
            assert!((got.amplitudes()[i] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn antisymmetric_rank_counts_pairs() {
        for d in 2..6 {
            let pa = symmetrizer(2, d, Symmetry::Antisymmetric).unwrap();
            let rank = pa.trace().re.round() as usize;
            // independent count: pairs i < j
            let pairs = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).count();
            assert_eq!(rank, pairs);
            let e = pa.eigh().unwrap();
            let ones = e.values.iter().filter(|v| (**v - 1.0).abs() < 1e-10).count();
            assert_eq!(ones, pairs);
        }
    }

    #[test]
    fn projector_algebra() {
        for n in 2..=3 {
            for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
                let p = symmetrizer(n, 2, kind).unwrap();
                let p2 = p.compose(&p).unwrap();
                assert!(crate::hilbert::linop::max_abs(&(p2.matrix() - p.matrix())) < 1e-14);
                assert!(p.hermiticity_defect() < 1e-15);
            }
        }
        let ps = symmetrizer(2, 3, Symmetry::Symmetric).unwrap();
        let pa = symmetrizer(2, 3, Symmetry::Antisymmetric).unwrap();
        assert!(ps.compose(&pa).unwrap().max_abs_entry() < 1e-15);
    }

    #[test]
    fn transposition_operator_swaps() {
        let s = HilbertSpace::uniform("p", 3, 2).unwrap();
        let u = permutation_operator(&s, &[1, 0, 2]).unwrap();
        let k = Ket::basis(s.clone(), s.flat_index(&[1, 0, 0])).unwrap();
        let out = u.apply(&k).unwrap();
        assert!((out.amplitudes()[s.flat_index(&[0, 1, 0])].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_factors_rejected() {
        let s = HilbertSpace::new([("a", 2), ("b", 3)]).unwrap();
        assert!(symmetrizer_on(&s, Symmetry::Symmetric).is_err());
    }
}
