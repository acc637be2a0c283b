use crate::error::{Error, Result};
use crate::hilbert::{permutations, random, CMatrix, CVector, HilbertSpace, Ket, LinOp, StateOperator, Symmetry, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// `tr[W_kk]` at or below this is a Pauli-blocked detector.
pub const PAULI_TOL: f64 = 1e-10;

/// State `T_k` of the `particles` pollution systems of one detector, an
/// operator on the `particles`-fold tensor power of the single-particle space.
#[derive(Clone, Debug)]
pub struct Pollution {
    pub particles: usize,
    pub state: CMatrix,
}

/// Detector array with identical-particle pollution.
///
/// The single-particle space has dimension `d` and is split into label
/// blocks `D_k`, one per detector. The measured system starts in a source
/// space whose standard basis vectors, taken group by group, are the
/// eigenvectors `φ_kl`; the coupling sends them to `φ̃_kl`, supported in `D_k`.
/// Detector `k`'s pollution state lives on `D_k` as well.
#[derive(Clone, Debug)]
pub struct TriggerModel {
    d: usize,
    blocks: Vec<Vec<usize>>,
    values: Vec<f64>,
    targets: Vec<Vec<CVector>>,
    pollution: Vec<Pollution>,
    symmetry: Symmetry,
    amplitudes: Vec<C64>,
}

fn digits(mut flat: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for f in (0..n).rev() {
        out[f] = flat % d;
        flat /= d;
    }
    out
}

fn flat(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// `P m` (`left`) or `m P`, with `P` the (anti)symmetrizer over the factors
/// `subset` of `n` factors of dimension `d`.
fn symmetrize(m: &CMatrix, d: usize, n: usize, subset: &[usize], kind: Symmetry, left: bool) -> CMatrix {
    if subset.len() < 2 {
        return m.clone();
    }
    let perms = permutations(subset.len());
    let norm = 1.0 / perms.len() as f64;
    let dim = m.nrows();
    let all: Vec<Vec<usize>> = (0..dim).map(|i| digits(i, d, n)).collect();
    let mut out = CMatrix::zeros(dim, dim);
    let mut target = vec![0; n];
    for (perm, odd) in &perms {
        let w = kind.weight(*odd) * norm;
        let map: Vec<usize> = all
            .iter()
            .map(|idx| {
                target.copy_from_slice(idx);
                for (i, &p) in perm.iter().enumerate() {
                    target[subset[p]] = idx[subset[i]];
                }
                flat(&target, d)
            })
            .collect();
        for c in 0..dim {
            for r in 0..dim {
                let z = m[(r, c)] * w;
                if left {
                    out[(map[r], c)] += z;
                } else {
                    out[(r, map[c])] += z;
                }
            }
        }
    }
    out
}

fn embed_block(v: &CVector, block: &[usize], d: usize) -> CVector {
    let mut out = CVector::zeros(d);
    for (i, &b) in block.iter().enumerate() {
        out[b] = v[i];
    }
    out
}

/// Moves factor `i` of an operator built in the order `src` (global slot
/// numbers) to global slot `src[i]`.
fn to_global(m: CMatrix, src: &[usize], d: usize) -> Result<CMatrix> {
    let n = src.len();
    let space = HilbertSpace::uniform("f", n, d)?;
    let mut order = vec![0; n];
    for (pos, &slot) in src.iter().enumerate() {
        order[slot] = pos;
    }
    Ok(LinOp::new(space, m)?.permute_factors(&order)?.into_matrix())
}

impl TriggerModel {
    pub fn new(
        d: usize,
        blocks: Vec<Vec<usize>>,
        values: Vec<f64>,
        targets: Vec<Vec<CVector>>,
        pollution: Vec<Pollution>,
        symmetry: Symmetry,
        amplitudes: Vec<C64>,
    ) -> Result<Self> {
        let n = blocks.len();
        if n == 0 {
            return Err(Error::InvalidParameter("at least one detector is required".into()));
        }
        for len in [values.len(), targets.len(), pollution.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let mut seen = vec![false; d];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty detector block".into()));
            }
            for &i in b {
                if i >= d || seen[i] {
                    return Err(Error::InvalidParameter(format!("block label {i} out of range or shared")));
                }
                seen[i] = true;
            }
        }
        for (k, &o) in values.iter().enumerate() {
            if o == 0.0 || values[..k].contains(&o) {
                return Err(Error::InvalidParameter(format!("trigger value {o} must be nonzero and distinct")));
            }
        }
        for (k, ts) in targets.iter().enumerate() {
            if ts.is_empty() {
                return Err(Error::InvalidParameter(format!("detector {k} has no eigenvectors")));
            }
            let mut worst = 0.0_f64;
            for (i, a) in ts.iter().enumerate() {
                if a.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: a.len() });
                }
                let outside = (0..d).filter(|j| !blocks[k].contains(j)).map(|j| a[j].norm()).fold(0.0, f64::max);
                worst = worst.max(outside);
                for (j, b) in ts.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((a.dotc(b) - C64::new(want, 0.0)).norm());
                }
            }
            if worst > super::bcl::ORTH_TOL {
                return Err(Error::OrthogonalityViolated(worst));
            }
        }
        for (k, pol) in pollution.iter().enumerate() {
            let dim = d.pow(pol.particles as u32);
            if pol.state.nrows() != dim || pol.state.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: pol.state.nrows() });
            }
            let space = HilbertSpace::uniform("p", pol.particles.max(1), d)?;
            if pol.particles == 0 {
                if (pol.state[(0, 0)] - C64::new(1.0, 0.0)).norm() > 1e-12 {
                    return Err(Error::InvalidTrace(pol.state[(0, 0)].re));
                }
                continue;
            }
            StateOperator::new(LinOp::new(space, pol.state.clone())?)?;
            let all: Vec<usize> = (0..pol.particles).collect();
            let left = symmetrize(&pol.state, d, pol.particles, &all, symmetry, true);
            let both = symmetrize(&left, d, pol.particles, &all, symmetry, false);
            let dev = (&both - &pol.state).camax();
            if dev > 1e-10 {
                return Err(Error::InvalidParameter(format!("pollution state of detector {k} is not exchange-symmetric (deviation {dev:e})")));
            }
            for r in 0..dim {
                let off = digits(r, d, pol.particles).iter().any(|x| !blocks[k].contains(x));
                if off && pol.state[(r, r)].re > 1e-12 {
                    return Err(Error::InvalidParameter(format!("pollution state of detector {k} leaves its block")));
                }
            }
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalizedVector(norm.sqrt()));
        }
        Ok(Self { d, blocks, values, targets, pollution, symmetry, amplitudes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_detectors(&self) -> usize {
        self.blocks.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn source_dim(&self) -> usize {
        self.targets.iter().map(Vec::len).sum()
    }

    pub fn source_space(&self) -> HilbertSpace {
        HilbertSpace::single("S", self.source_dim()).expect("positive dimension")
    }

    /// Number of single-particle factors of `S + Σ_k S'_k`.
    pub fn n_particles(&self) -> usize {
        1 + self.pollution.iter().map(|p| p.particles).sum::<usize>()
    }

    pub fn particle_space(&self) -> HilbertSpace {
        let mut labels = vec![("S".to_string(), self.d)];
        for (k, p) in self.pollution.iter().enumerate() {
            labels.extend((0..p.particles).map(|j| (format!("S'{}.{}", k + 1, j + 1), self.d)));
        }
        HilbertSpace::new(labels).expect("distinct labels")
    }

    /// `A_ion = ⊗_k span{χ_k0, …, χ_kn}`.
    pub fn apparatus_space(&self) -> HilbertSpace {
        let levels = 1 + self.amplitudes.len();
        HilbertSpace::new((1..=self.n_detectors()).map(|k| (format!("A{k}"), levels))).expect("distinct labels")
    }

    /// Global slots of detector `k`'s pollution particles.
    fn slots(&self, k: usize) -> std::ops::Range<usize> {
        let start = 1 + self.pollution[..k].iter().map(|p| p.particles).sum::<usize>();
        start..start + self.pollution[k].particles
    }

    /// Ready state `ψ = ⊗_k χ_k0`.
    pub fn ready(&self) -> Ket {
        Ket::basis(self.apparatus_space(), 0).expect("nonempty space")
    }

    /// Trigger ket `ψ_k`: detector `k` in `Σ_n a_n χ_kn`, all others in `χ_j0`.
    pub fn trigger_ket(&self, k: usize) -> Ket {
        let space = self.apparatus_space();
        let levels = 1 + self.amplitudes.len();
        let mut amps = CVector::zeros(space.dim());
        let mut idx = vec![0; self.n_detectors()];
        for (n, a) in self.amplitudes.iter().enumerate() {
            idx[k] = n + 1;
            amps[flat(&idx, levels)] = *a;
        }
        Ket::new(space, amps).expect("dimension from space")
    }

    /// `A = Σ_k o_k |ψ_k⟩⟨ψ_k|`.
    pub fn trigger_observable(&self) -> LinOp {
        (0..self.n_detectors()).fold(LinOp::zeros(self.apparatus_space()), |acc, k| {
            acc.add(&self.trigger_ket(k).projector().scale_real(self.values[k])).expect("same space")
        })
    }

    /// Born weights `p_k` and conditional kets `φ¹_k` (in the `d`-dimensional
    /// single-particle space) for the source state `φ`.
    pub fn conditional(&self, phi: &Ket) -> Result<(Vec<f64>, Vec<Option<CVector>>)> {
        if phi.dim() != self.source_dim() {
            return Err(Error::DimensionMismatch { expected: self.source_dim(), got: phi.dim() });
        }
        phi.require_unit(1e-10)?;
        let a = phi.amplitudes();
        let mut c = 0;
        let mut p = Vec::with_capacity(self.n_detectors());
        let mut kets = Vec::with_capacity(self.n_detectors());
        for ts in &self.targets {
            let mut v = CVector::zeros(self.d);
            for t in ts {
                v += t * a[c];
                c += 1;
            }
            let pk = v.norm_squared();
            p.push(pk);
            kets.push((pk > 0.0).then(|| v.unscale(pk.sqrt())));
        }
        Ok((p, kets))
    }

    /// `W_kl` on `H^{1+M_k+M_l}` with factors ordered `(S'_k, S, S'_l)`, or
    /// `W_kk` on `(S, S'_k)`.
    pub fn w_operator(&self, k: usize, l: usize, phi_k: &CVector, phi_l: &CVector) -> CMatrix {
        let d = self.d;
        let (mk, ml) = (self.pollution[k].particles, self.pollution[l].particles);
        let kind = self.symmetry;
        if k == l {
            let x = (phi_k * phi_k.adjoint()).kronecker(&self.pollution[k].state);
            let subset: Vec<usize> = (0..=mk).collect();
            let left = symmetrize(&x, d, mk + 1, &subset, kind, true);
            return symmetrize(&left, d, mk + 1, &subset, kind, false);
        }
        let n = 1 + mk + ml;
        let x = self.pollution[k].state.kronecker(&(phi_k * phi_l.adjoint())).kronecker(&self.pollution[l].state);
        let first: Vec<usize> = (0..=mk).collect();
        let last: Vec<usize> = (mk..n).collect();
        let left = symmetrize(&x, d, n, &first, kind, true);
        symmetrize(&left, d, n, &last, kind, false)
    }

    /// `X ⊗ (⊗_{j∉skip} T_j)` in global particle order, with `X` built on
    /// the global slots `x_slots`.
    fn with_rest(&self, x: CMatrix, x_slots: Vec<usize>, skip: &[usize]) -> Result<CMatrix> {
        let mut m = x;
        let mut src = x_slots;
        for j in (0..self.n_detectors()).filter(|j| !skip.contains(j)) {
            m = m.kronecker(&self.pollution[j].state);
            src.extend(self.slots(j));
        }
        to_global(m, &src, self.d)
    }

    /// Particle operator of the `|ψ_k⟩⟨ψ_l|` term of `T_trig2`, without the
    /// weight `√(p_k p_l) ν_k ν_l`.
    fn trig2_term(&self, k: usize, l: usize, phi1: &[Option<CVector>]) -> Result<CMatrix> {
        let (Some(a), Some(b)) = (&phi1[k], &phi1[l]) else {
            return Err(Error::InvalidParameter("term with zero Born weight".into()));
        };
        let w = self.w_operator(k, l, a, b);
        if k == l {
            let slots = std::iter::once(0).chain(self.slots(k)).collect();
            self.with_rest(w, slots, &[k])
        } else {
            let slots = self.slots(k).chain(std::iter::once(0)).chain(self.slots(l)).collect();
            self.with_rest(w, slots, &[k, l])
        }
    }
}

/// Operator on `(S + Σ_k S'_k) ⊗ A_ion` stored by its blocks
/// `X_kl = ⟨ψ_k|·|ψ_l⟩` along the trigger kets; every other block vanishes.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub blocks: Vec<Vec<Option<CMatrix>>>,
}

impl BlockOperator {
    fn zeros(n: usize) -> Self {
        Self { blocks: vec![vec![None; n]; n] }
    }

    pub fn trace(&self) -> C64 {
        (0..self.blocks.len()).filter_map(|k| self.blocks[k][k].as_ref()).map(|m| m.trace()).sum()
    }

    /// Apparatus marginal in the trigger basis, `[tr X_kl]_kl`.
    pub fn apparatus_marginal(&self) -> CMatrix {
        let n = self.blocks.len();
        CMatrix::from_fn(n, n, |k, l| self.blocks[k][l].as_ref().map_or(C64::new(0.0, 0.0), |m| m.trace()))
    }

    /// `tr[B X]` for `B` given by its blocks `B_lk = ⟨ψ_l|B|ψ_k⟩`.
    pub fn trace_with(&self, b: &[Vec<Option<CMatrix>>]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (k, row) in self.blocks.iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                if let (Some(x), Some(bl)) = (x, &b[l][k]) {
                    s += bl.iter().zip(x.transpose().iter()).map(|(p, q)| p * q).sum::<C64>();
                }
            }
        }
        s
    }

    /// Full operator on `particles ⊗ A_ion`.
    pub fn to_linop(&self, model: &TriggerModel) -> Result<LinOp> {
        let space = model.particle_space().concat(&model.apparatus_space())?;
        let kets: Vec<Ket> = (0..model.n_detectors()).map(|k| model.trigger_ket(k)).collect();
        let np = model.particle_space().dim();
        let mut m = CMatrix::zeros(space.dim(), space.dim());
        for (k, row) in self.blocks.iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                if let Some(x) = x {
                    let outer = kets[k].amplitudes() * kets[l].amplitudes().adjoint();
                    m += x.kronecker(&outer);
                }
            }
        }
        debug_assert_eq!(m.nrows(), np * model.apparatus_space().dim());
        LinOp::new(space, m)
    }
}

/// One component `p_k · (ν_k² W_kk ⊗ T_rest) ⊗ |ψ_k⟩⟨ψ_k|` of `T_trig`.
#[derive(Clone, Debug)]
pub struct TriggerComponent {
    pub detector: usize,
    pub weight: f64,
    pub particles: CMatrix,
}

#[derive(Clone, Debug)]
pub struct TriggerStates {
    pub p: Vec<f64>,
    /// `ν_k = 1/√tr[W_kk]`; zero where `p_k = 0`.
    pub nu: Vec<f64>,
    /// Maximally entangled attempt with `ν = 1`; not a state.
    pub trig1: BlockOperator,
    pub trig1_trace: f64,
    pub trig2: BlockOperator,
    pub trig3: BlockOperator,
    /// Gemenge components of `T_trig`, one per detector with `p_k > 0`.
    pub trig: Vec<TriggerComponent>,
}

/// Builds `T_trig1`, `T_trig2`, `T_trig3` and `T_trig` for the source state `φ`.
pub fn trigger_states(model: &TriggerModel, phi: &Ket) -> Result<TriggerStates> {
    let n = model.n_detectors();
    let (p, phi1) = model.conditional(phi)?;
    let live: Vec<usize> = (0..n).filter(|&k| phi1[k].is_some()).collect();
    let mut nu = vec![0.0; n];
    let mut diag = vec![None; n];
    for &k in &live {
        let x = model.trig2_term(k, k, &phi1)?;
        let tr = x.trace().re;
        if tr <= PAULI_TOL {
            return Err(Error::PauliBlocked { detector: k, trace: tr });
        }
        nu[k] = 1.0 / tr.sqrt();
        diag[k] = Some(x);
    }
    let mut trig2 = BlockOperator::zeros(n);
    let mut trig3 = BlockOperator::zeros(n);
    let mut trig = Vec::with_capacity(live.len());
    for &k in &live {
        let x = diag[k].take().expect("built above") * C64::new(p[k] * nu[k] * nu[k], 0.0);
        trig.push(TriggerComponent { detector: k, weight: p[k], particles: x.unscale(p[k]) });
        trig2.blocks[k][k] = Some(x.clone());
        trig3.blocks[k][k] = Some(x);
    }
    for (i, &k) in live.iter().enumerate() {
        for &l in &live[i + 1..] {
            let x = model.trig2_term(k, l, &phi1)? * C64::new((p[k] * p[l]).sqrt() * nu[k] * nu[l], 0.0);
            trig2.blocks[l][k] = Some(x.adjoint());
            trig2.blocks[k][l] = Some(x);
        }
    }
    let trig1 = trig1(model, &p, &phi1)?;
    let trig1_trace = trig1.trace().re;
    Ok(TriggerStates { p, nu, trig1, trig1_trace, trig2, trig3, trig })
}

/// `Σ √(p_k p_l) P(|φ¹_k⟩⟨φ¹_l| ⊗ T_1 ⊗ … ⊗ T_N)P ⊗ |ψ_k⟩⟨ψ_l|` with `P` over
/// all particles.
fn trig1(model: &TriggerModel, p: &[f64], phi1: &[Option<CVector>]) -> Result<BlockOperator> {
    let n = model.n_detectors();
    let np = model.n_particles();
    let all: Vec<usize> = (0..np).collect();
    let rest = model.pollution.iter().fold(CMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, t| acc.kronecker(&t.state));
    let mut out = BlockOperator::zeros(n);
    for k in 0..n {
        for l in 0..n {
            if let (Some(a), Some(b)) = (&phi1[k], &phi1[l]) {
                let x = (a * b.adjoint()).kronecker(&rest) * C64::new((p[k] * p[l]).sqrt(), 0.0);
                let left = symmetrize(&x, model.d, np, &all, model.symmetry, true);
                out.blocks[k][l] = Some(symmetrize(&left, model.d, np, &all, model.symmetry, false));
            }
        }
    }
    Ok(out)
}

impl TriggerStates {
    fn components(&self, model: &TriggerModel) -> Result<Vec<(f64, StateOperator)>> {
        let parts = model.particle_space();
        self.trig
            .iter()
            .map(|c| {
                let x = StateOperator::new(LinOp::new(parts.clone(), c.particles.clone())?)?;
                let a = StateOperator::pure(&model.trigger_ket(c.detector))?;
                Ok((c.weight, crate::hilbert::tensor(&x, &a)?))
            })
            .collect()
    }

    /// `T_trig3` on `particles ⊗ A_ion`, validated from its block form and
    /// carrying the decomposition along the trigger kets.
    pub fn trig3_state(&self, model: &TriggerModel) -> Result<StateOperator> {
        StateOperator::new(self.trig3.to_linop(model)?)?.with_gemenge(self.components(model)?)
    }

    /// `T_trig` assembled from the product form of its components.
    pub fn trig_state(&self, model: &TriggerModel) -> Result<StateOperator> {
        StateOperator::from_gemenge(self.components(model)?)
    }

    /// Apparatus marginal of `T_trig`: the gemenge `Σ p_k |ψ_k⟩⟨ψ_k|`.
    pub fn trig_apparatus(&self, model: &TriggerModel) -> Result<StateOperator> {
        let comps = self
            .trig
            .iter()
            .map(|c| {
                let tr = c.particles.trace().re;
                Ok((c.weight * tr, StateOperator::pure(&model.trigger_ket(c.detector))?))
            })
            .collect::<Result<Vec<_>>>()?;
        StateOperator::from_gemenge(comps)
    }
}

/// `max_{k≠l} |tr[W_kl]|` for the source state `φ`.
pub fn prop22_max(model: &TriggerModel, phi: &Ket) -> Result<f64> {
    let (_, phi1) = model.conditional(phi)?;
    let mut worst = 0.0_f64;
    for (k, a) in phi1.iter().enumerate() {
        for (l, b) in phi1.iter().enumerate() {
            if let (true, Some(a), Some(b)) = (k != l, a, b) {
                worst = worst.max(model.w_operator(k, l, a, b).trace().norm());
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct Prop23Report {
    /// `max |tr[B T_trig2] − tr[B T_trig3]|` over random `B` commuting with `1⊗A`.
    pub commuting_max: f64,
    /// The same deviation for random `B` with off-diagonal trigger blocks.
    pub control: Vec<f64>,
}

impl Prop23Report {
    pub fn control_fraction_above(&self, threshold: f64) -> f64 {
        self.control.iter().filter(|&&x| x > threshold).count() as f64 / self.control.len().max(1) as f64
    }
}

fn random_hermitian_blocks<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, commuting: bool) -> Vec<Vec<Option<CMatrix>>> {
    let mut b = vec![vec![None; n]; n];
    for k in 0..n {
        let g = random::ginibre(rng, dim, dim);
        b[k][k] = Some((&g + g.adjoint()).unscale(2.0));
        if !commuting {
            for l in 0..k {
                let g = random::ginibre(rng, dim, dim);
                b[l][k] = Some(g.adjoint());
                b[k][l] = Some(g);
            }
        }
    }
    b
}

/// Compares `tr[B T_trig2]` and `tr[B T_trig3]` for `trials` random Hermitian
/// `B`. Commuting `B` are block diagonal along the trigger kets; their
/// components outside `span{ψ_k}` do not meet either state and are omitted.
pub fn prop23_check(states: &TriggerStates, trials: usize, seed: u64) -> Result<Prop23Report> {
    if trials == 0 {
        return Err(Error::InvalidParameter("prop23_check needs at least one trial".into()));
    }
    let n = states.p.len();
    let dim = states.trig3.blocks.iter().flatten().flatten().next().map_or(0, |m| m.nrows());
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let dev = |b: &[Vec<Option<CMatrix>>]| (states.trig2.trace_with(b) - states.trig3.trace_with(b)).norm();
            let commuting = dev(&random_hermitian_blocks(&mut rng, n, dim, true));
            let control = dev(&random_hermitian_blocks(&mut rng, n, dim, false));
            (commuting, control)
        })
        .collect();
    Ok(Prop23Report {
        commuting_max: pairs.iter().map(|x| x.0).fold(0.0, f64::max),
        control: pairs.iter().map(|x| x.1).collect(),
    })
}

/// Random model: consecutive blocks of the given sizes, targets spanning each
/// block, full-rank pollution states of `particles` systems per detector,
/// trigger values `1..=N` and random amplitudes over `n_ion` ionised levels.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, block_sizes: &[usize], particles: usize, symmetry: Symmetry, n_ion: usize) -> Result<TriggerModel> {
    let d: usize = block_sizes.iter().sum();
    let mut blocks = Vec::with_capacity(block_sizes.len());
    let mut targets = Vec::with_capacity(block_sizes.len());
    let mut pollution = Vec::with_capacity(block_sizes.len());
    let mut start = 0;
    for &b in block_sizes {
        let block: Vec<usize> = (start..start + b).collect();
        start += b;
        let u = random::unitary(rng, HilbertSpace::single("D", b)?);
        targets.push((0..b).map(|j| embed_block(&u.matrix().column(j).into_owned(), &block, d)).collect());
        pollution.push(random_pollution(rng, &block, d, particles, symmetry)?);
        blocks.push(block);
    }
    let values = (1..=block_sizes.len()).map(|k| k as f64).collect();
    let amps = random::ket(rng, HilbertSpace::single("I", n_ion.max(1))?);
    TriggerModel::new(d, blocks, values, targets, pollution, symmetry, amps.into_amplitudes().iter().copied().collect())
}

/// Full-rank state on the `particles`-fold power of a block, projected onto
/// the exchange-symmetric (or antisymmetric) subspace and embedded.
pub fn random_pollution<R: Rng + ?Sized>(rng: &mut R, block: &[usize], d: usize, particles: usize, symmetry: Symmetry) -> Result<Pollution> {
    if particles == 0 {
        return Ok(Pollution { particles, state: CMatrix::from_element(1, 1, C64::new(1.0, 0.0)) });
    }
    let b = block.len();
    let local = random::state(rng, HilbertSpace::uniform("q", particles, b)?);
    let all: Vec<usize> = (0..particles).collect();
    let left = symmetrize(local.matrix(), b, particles, &all, symmetry, true);
    let proj = symmetrize(&left, b, particles, &all, symmetry, false);
    let tr = proj.trace().re;
    if tr <= PAULI_TOL {
        return Err(Error::PauliExclusion);
    }
    let dim = d.pow(particles as u32);
    let mut state = CMatrix::zeros(dim, dim);
    let lift = |i: usize| flat(&digits(i, b, particles).iter().map(|&x| block[x]).collect::<Vec<_>>(), d);
    for r in 0..proj.nrows() {
        for c in 0..proj.ncols() {
            state[(lift(r), lift(c))] = proj[(r, c)] / tr;
        }
    }
    Ok(Pollution { particles, state })
}
