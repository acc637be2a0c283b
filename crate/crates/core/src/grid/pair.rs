use super::{Grid1D, GridWavefunction, KernelOp, RegionMask};
use crate::error::{Error, Result};
use crate::hilbert::{symmetrizer_on, CMatrix, LinOp, StateOperator, Symmetry, Tensor, C64};
use crate::povm::Effect;
use serde::Serialize;

/// Two-particle wavefunction `Ψ(x₁, x₂)` stored as an `n × n` matrix with
/// rows indexed by `x₁`; `‖Ψ‖² = dx² Σ |Ψ|²`.
#[derive(Clone, Debug)]
pub struct TwoParticleWavefunction {
    grid: Grid1D,
    values: CMatrix,
}

impl TwoParticleWavefunction {
    pub fn new(grid: Grid1D, values: CMatrix) -> Result<Self> {
        if values.nrows() != grid.n || values.ncols() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: values.nrows() });
        }
        Ok(Self { grid, values })
    }

    /// `ψ(x₁) φ(x₂)`
    pub fn product(psi: &GridWavefunction, phi: &GridWavefunction) -> Result<Self> {
        psi.grid().require_same(phi.grid())?;
        let n = psi.grid().n;
        let values = CMatrix::from_fn(n, n, |i, j| psi.values()[i] * phi.values()[j]);
        Ok(Self { grid: *psi.grid(), values })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.dx * self.grid.dx * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `dx² Σ Ψ* Φ`
    pub fn inner(&self, other: &TwoParticleWavefunction) -> Result<C64> {
        self.grid.require_same(&other.grid)?;
        let s: C64 = self.values.iter().zip(other.values.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.dx * self.grid.dx)
    }

    /// `Ψ(x₂, x₁)`
    pub fn swapped(&self) -> Self {
        Self { grid: self.grid, values: self.values.transpose() }
    }

    /// Flattened orthonormal-basis coordinates (`dx Ψ`), first particle most significant.
    pub fn to_vector(&self) -> crate::hilbert::CVector {
        let n = self.grid.n;
        crate::hilbert::CVector::from_fn(n * n, |k, _| self.values[(k / n, k % n)] * self.grid.dx)
    }
}

/// `Ψ = ν(ψ⊗φ + ε φ⊗ψ)` with `ν = [2(1 + ε|c|²)]^{−1/2}`, `c = ⟨ψ|φ⟩`.
///
/// Both inputs are normalized first. Fails with [`Error::PauliExclusion`]
/// when the combination vanishes.
pub fn symmetrize_pair(
    psi: &GridWavefunction,
    phi: &GridWavefunction,
    kind: Symmetry,
) -> Result<(TwoParticleWavefunction, f64)> {
    psi.grid().require_same(phi.grid())?;
    let psi = psi.normalized()?;
    let phi = phi.normalized()?;
    let c = psi.inner(&phi)?;
    let eps = kind.epsilon();
    let denom = 2.0 * (1.0 + eps * c.norm_sqr());
    if denom < 1e-12 {
        return Err(Error::PauliExclusion);
    }
    let nu = denom.powf(-0.5);
    let a = TwoParticleWavefunction::product(&psi, &phi)?;
    let b = TwoParticleWavefunction::product(&phi, &psi)?;
    let values = (a.values + b.values.scale(eps)).scale(nu);
    Ok((TwoParticleWavefunction { grid: *psi.grid(), values }, nu))
}

/// `A = a⊗1 + 1⊗a`: the two-particle observable built from one-particle `a`,
/// kept in factored form so the `n² × n²` matrix is never needed.
#[derive(Clone, Debug)]
pub struct SymmetricObservable {
    a: KernelOp,
}

pub fn symmetric_observable(a: &KernelOp) -> SymmetricObservable {
    SymmetricObservable { a: a.clone() }
}

impl SymmetricObservable {
    pub fn one_particle(&self) -> &KernelOp {
        &self.a
    }

    /// `(AΨ)(x₁,x₂) = Σ a(x₁;x₁′)Ψ(x₁′,x₂) dx + Σ a(x₂;x₂′)Ψ(x₁,x₂′) dx`
    pub fn apply(&self, psi: &TwoParticleWavefunction) -> Result<TwoParticleWavefunction> {
        self.a.grid().require_same(psi.grid())?;
        let m = self.a.matrix();
        let values = m * &psi.values + &psi.values * m.transpose();
        TwoParticleWavefunction::new(*psi.grid(), values)
    }

    pub fn expectation(&self, psi: &TwoParticleWavefunction) -> Result<C64> {
        psi.inner(&self.apply(psi)?)
    }

    /// Dense orthonormal-basis matrix `M⊗1 + 1⊗M`; intended for small grids.
    pub fn to_dense(&self) -> Result<LinOp> {
        let g = self.a.grid();
        let one = self.a.to_linop();
        let id = LinOp::identity(g.space());
        one.tensor(&id)?.add(&id.tensor(&one)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterCheck {
    /// `tr[(E⊗1 + 1⊗E) P(T₁⊗T₂)P] / tr[P(T₁⊗T₂)P]`
    pub lhs: f64,
    /// `tr[E T₁]`
    pub rhs: f64,
    /// `tr[P(T₁⊗T₂)P]` with `P = ½(1 + εS)`
    pub normalization: f64,
    pub pass: bool,
}

pub const CLUSTER_TOL: f64 = 1e-8;

fn check_cluster_inputs(
    t1: &StateOperator,
    t2: &StateOperator,
    d1: &RegionMask,
    d2: &RegionMask,
) -> Result<Grid1D> {
    d1.require_nonempty()?;
    d2.require_nonempty()?;
    if !d1.is_disjoint(d2)? {
        return Err(Error::OverlappingMasks);
    }
    let g = d1.grid();
    for (t, d) in [(t1, d1), (t2, d2)] {
        if t.dim() != g.n {
            return Err(Error::DimensionMismatch { expected: g.n, got: t.dim() });
        }
        let k = KernelOp::from_linop(g, t.op())?;
        let defect = k.locality_defect(d)?;
        if defect > 1e-12 {
            return Err(Error::InvalidParameter(format!("state is not local to its region (defect {defect:e})")));
        }
    }
    Ok(g)
}

fn tr_product(mats: &[&CMatrix]) -> C64 {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = &acc * *m;
    }
    acc.trace()
}

/// Cluster separability for two identical particles prepared in `T₁`
/// (local to `D₁`) and `T₂` (local to `D₂`), with `D₁ ∩ D₂ = ∅`.
///
/// Uses `tr[(E⊗1)S(T₁⊗T₂)] = tr[T₁ E T₂]`, `tr[(1⊗E)S(T₁⊗T₂)] = tr[E T₁ T₂]`
/// and `tr[S(T₁⊗T₂)] = tr[T₁T₂]`, so only `n × n` products are formed.
pub fn cluster_separability_check(
    t1: &StateOperator,
    t2: &StateOperator,
    e: &Effect,
    d1: &RegionMask,
    d2: &RegionMask,
    kind: Symmetry,
) -> Result<ClusterCheck> {
    check_cluster_inputs(t1, t2, d1, d2)?;
    let eps = kind.epsilon();
    let (a, b, em) = (t1.matrix(), t2.matrix(), e.op().matrix());
    let direct = tr_product(&[em, a]) + tr_product(&[em, b]);
    let exchange = tr_product(&[a, em, b]) + tr_product(&[em, a, b]);
    let numerator = (direct + exchange * eps) * 0.5;
    let normalization = 0.5 * (1.0 + eps * tr_product(&[a, b]).re);
    let lhs = numerator.re / normalization;
    let rhs = tr_product(&[em, a]).re;
    Ok(ClusterCheck { lhs, rhs, normalization, pass: (lhs - rhs).abs() < CLUSTER_TOL })
}

/// Same quantity evaluated by building `P` and `T₁⊗T₂` densely; `n ≤ 32`.
pub fn cluster_separability_dense(
    t1: &StateOperator,
    t2: &StateOperator,
    e: &Effect,
    d1: &RegionMask,
    d2: &RegionMask,
    kind: Symmetry,
) -> Result<ClusterCheck> {
    let g = check_cluster_inputs(t1, t2, d1, d2)?;
    if g.n > 32 {
        return Err(Error::InvalidParameter(format!("dense cluster check limited to n ≤ 32, got {}", g.n)));
    }
    let pair_space = g.space().concat(&g.space())?;
    let p = symmetrizer_on(&pair_space, kind)?;
    let w = t1.op().tensor(t2.op())?;
    let pwp = p.compose(&w)?.compose(&p)?;
    let id = LinOp::identity(g.space());
    let big_e = e.op().tensor(&id)?.add(&id.tensor(e.op())?)?;
    let normalization = pwp.trace().re;
    let lhs = big_e.compose(&pwp)?.trace().re / normalization;
    let rhs = tr_product(&[e.op().matrix(), t1.matrix()]).re;
    Ok(ClusterCheck { lhs, rhs, normalization, pass: (lhs - rhs).abs() < CLUSTER_TOL })
}

/// Random state supported in `D` (Wishart on the masked coordinates).
pub fn random_local_state<R: rand::Rng + ?Sized>(rng: &mut R, d: &RegionMask, rank: usize) -> Result<StateOperator> {
    d.require_nonempty()?;
    let g = d.grid();
    let n = g.n;
    let mut a = crate::hilbert::random::ginibre(rng, n, rank.max(1));
    for i in 0..n {
        if !d.contains(i) {
            a.row_mut(i).fill(C64::new(0.0, 0.0));
        }
    }
    let w = &a * a.adjoint();
    let tr = w.trace().re;
    StateOperator::new(LinOp::new(g.space(), w.unscale(tr))?)
}

/// Sampled test of the separation-status conditions for region `D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    /// Number of sampled `(T′, remote state)` pairs.
    pub samples: usize,
    /// Largest `|registered − tr[T′E]|` over the samples.
    pub max_deviation: f64,
    /// `tr[T P_D]`, the witness that `D` is non-trivial for `T`.
    pub witness_probability: f64,
    pub holds: bool,
}

/// Checks, for `samples` random `D`-local states `T′` each accompanied by a
/// random identical system local to `remote`, that the registered
/// probability of the `D`-local effect `E` equals `tr[T′E]`; and that `T`
/// has non-zero probability on `P_D`.
///
/// The first condition is universally quantified over states, so this is
/// evidence from a finite sample, not a proof.
pub fn separation_status_check<R: rand::Rng + ?Sized>(
    rng: &mut R,
    t: &StateOperator,
    e: &Effect,
    d: &RegionMask,
    remote: &RegionMask,
    kind: Symmetry,
    samples: usize,
) -> Result<SeparationReport> {
    let g = d.grid();
    let local = KernelOp::from_linop(g, e.op())?;
    if !local.is_d_local(d, 1e-12)? {
        return Err(Error::InvalidParameter("effect is not local to the region".into()));
    }
    let mut max_deviation = 0.0_f64;
    for _ in 0..samples {
        let rank = rng.random_range(1..=3);
        let tp = random_local_state(rng, d, rank)?;
        let other = random_local_state(rng, remote, rank)?;
        let c = cluster_separability_check(&tp, &other, e, d, remote, kind)?;
        max_deviation = max_deviation.max((c.lhs - c.rhs).abs());
    }
    let witness_probability = t.expectation_real(&d.projector())?;
    Ok(SeparationReport {
        samples,
        max_deviation,
        witness_probability,
        holds: max_deviation < CLUSTER_TOL && witness_probability > 1e-12,
    })
}
