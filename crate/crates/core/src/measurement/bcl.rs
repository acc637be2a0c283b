use crate::error::{Error, Result};
use crate::hilbert::{random, tensor, CMatrix, CVector, HilbertSpace, Ket, LinOp, StateOperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for the orthonormality conditions on spec vectors.
pub const ORTH_TOL: f64 = 1e-10;
/// `K_l K_k = δ_kl K_k` is accepted below this entrywise deviation.
pub const REPEAT_TOL: f64 = 1e-10;

/// One eigenvalue `o_k` of the measured observable with its eigenvectors
/// `φ_kl` and the targets `φ̃_kl` they are sent to.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    pub value: f64,
    pub vectors: Vec<CVector>,
    pub targets: Vec<CVector>,
}

/// Coupling data of a premeasurement: system eigenstructure, apparatus ready
/// state `ψ`, pointer states `ψ_k` and targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct BCLSpec {
    system_dim: usize,
    apparatus_dim: usize,
    groups: Vec<EigenGroup>,
    ready: CVector,
    pointers: Vec<CVector>,
}

fn gram_defect(vs: &[&CVector]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

fn require_dim(v: &CVector, dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    Ok(())
}

impl BCLSpec {
    pub fn new(system_dim: usize, apparatus_dim: usize, groups: Vec<EigenGroup>, ready: CVector, pointers: Vec<CVector>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidParameter("at least one eigenvalue group is required".into()));
        }
        if pointers.len() != groups.len() {
            return Err(Error::DimensionMismatch { expected: groups.len(), got: pointers.len() });
        }
        if apparatus_dim < groups.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "apparatus dimension {apparatus_dim} cannot hold {} pointer states and the ready state",
                groups.len()
            )));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.vectors.is_empty() || g.vectors.len() != g.targets.len() {
                return Err(Error::InvalidParameter(format!("group {i} needs as many targets as eigenvectors (at least one)")));
            }
            if groups[..i].iter().any(|h| h.value == g.value) {
                return Err(Error::InvalidParameter(format!("eigenvalue {} repeated", g.value)));
            }
            for v in g.vectors.iter().chain(&g.targets) {
                require_dim(v, system_dim)?;
            }
        }
        let all: Vec<&CVector> = groups.iter().flat_map(|g| &g.vectors).collect();
        if all.len() != system_dim {
            return Err(Error::InvalidParameter(format!("{} eigenvectors do not span a {system_dim}-dimensional space", all.len())));
        }
        let d = gram_defect(&all);
        if d > ORTH_TOL {
            return Err(Error::OrthogonalityViolated(d));
        }
        for g in &groups {
            let d = gram_defect(&g.targets.iter().collect::<Vec<_>>());
            if d > ORTH_TOL {
                return Err(Error::OrthogonalityViolated(d));
            }
        }
        require_dim(&ready, apparatus_dim)?;
        for v in &pointers {
            require_dim(v, apparatus_dim)?;
        }
        let app: Vec<&CVector> = std::iter::once(&ready).chain(&pointers).collect();
        let d = gram_defect(&app);
        if d > ORTH_TOL {
            return Err(Error::OrthogonalityViolated(d));
        }
        Ok(Self { system_dim, apparatus_dim, groups, ready, pointers })
    }

    /// Spec with `φ̃_kl = φ_kl`.
    pub fn von_neumann(system_dim: usize, apparatus_dim: usize, groups: Vec<(f64, Vec<CVector>)>, ready: CVector, pointers: Vec<CVector>) -> Result<Self> {
        let groups = groups.into_iter().map(|(value, vectors)| EigenGroup { value, targets: vectors.clone(), vectors }).collect();
        Self::new(system_dim, apparatus_dim, groups, ready, pointers)
    }

    pub fn system_space(&self) -> HilbertSpace {
        HilbertSpace::single("S", self.system_dim).expect("validated dimension")
    }

    pub fn apparatus_space(&self) -> HilbertSpace {
        HilbertSpace::single("A", self.apparatus_dim).expect("validated dimension")
    }

    pub fn composite_space(&self) -> HilbertSpace {
        self.system_space().concat(&self.apparatus_space()).expect("distinct labels")
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn n_outcomes(&self) -> usize {
        self.groups.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.value).collect()
    }

    pub fn ready(&self) -> Ket {
        Ket::new(self.apparatus_space(), self.ready.clone()).expect("validated dimension")
    }

    pub fn pointer(&self, k: usize) -> Ket {
        Ket::new(self.apparatus_space(), self.pointers[k].clone()).expect("validated dimension")
    }

    pub fn is_von_neumann(&self, tol: f64) -> bool {
        self.groups.iter().all(|g| g.vectors.iter().zip(&g.targets).all(|(a, b)| (a - b).camax() <= tol))
    }

    /// Spectral projection `E_k = Σ_l |φ_kl⟩⟨φ_kl|`.
    pub fn eigenprojection(&self, k: usize) -> LinOp {
        let mut m = CMatrix::zeros(self.system_dim, self.system_dim);
        for v in &self.groups[k].vectors {
            m += v * v.adjoint();
        }
        LinOp::new(self.system_space(), m).expect("validated dimension")
    }

    /// `O = Σ_k o_k E_k`.
    pub fn observable(&self) -> LinOp {
        (0..self.n_outcomes()).fold(LinOp::zeros(self.system_space()), |acc, k| {
            acc.add(&self.eigenprojection(k).scale_real(self.groups[k].value)).expect("same space")
        })
    }

    /// Columns `φ_kl⊗ψ` and `φ̃_kl⊗ψ_k`, in group order.
    fn frames(&self) -> (CMatrix, CMatrix) {
        let n = self.system_dim * self.apparatus_dim;
        let mut from = CMatrix::zeros(n, self.system_dim);
        let mut to = CMatrix::zeros(n, self.system_dim);
        let mut c = 0;
        for (k, g) in self.groups.iter().enumerate() {
            for (v, t) in g.vectors.iter().zip(&g.targets) {
                from.set_column(c, &v.kronecker(&self.ready));
                to.set_column(c, &t.kronecker(&self.pointers[k]));
                c += 1;
            }
        }
        (from, to)
    }
}

/// How the unitary is extended beyond `span{φ_kl⊗ψ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// Complement bases matched in the order Householder QR produces them.
    Canonical,
    /// Canonical matching followed by a Haar-random unitary on the complement.
    Random(u64),
}

/// Orthonormal basis of the orthogonal complement of the (orthonormal) columns of `v`.
fn complement(v: &CMatrix) -> CMatrix {
    let n = v.nrows();
    let r = v.ncols();
    let mut aug = CMatrix::zeros(n, r + n);
    aug.view_mut((0, 0), (n, r)).copy_from(v);
    aug.view_mut((0, r), (n, n)).fill_with_identity();
    let q = aug.qr().q();
    q.columns(r, n - r).into_owned()
}

/// Unitary `U` on `H_S⊗H_A` with `U(φ_kl⊗ψ) = φ̃_kl⊗ψ_k`.
pub fn build_unitary(spec: &BCLSpec, completion: Completion) -> LinOp {
    let (from, to) = spec.frames();
    let from_c = complement(&from);
    let to_c = complement(&to);
    let rest = match completion {
        Completion::Canonical => to_c,
        Completion::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = from_c.ncols();
            let r = random::unitary(&mut rng, HilbertSpace::single("C", m).expect("positive dimension"));
            to_c * r.matrix()
        }
    };
    let u = &to * from.adjoint() + rest * from_c.adjoint();
    LinOp::new(spec.composite_space(), u).expect("composite dimension")
}

#[derive(Clone, Debug)]
pub struct PremeasurementResult {
    pub phi_end: Ket,
    pub p: Vec<f64>,
    /// Conditional system kets; `None` where `p_k = 0`.
    pub phi1: Vec<Option<Ket>>,
    pub apparatus_state: StateOperator,
    /// `Σ_{k≠l} |√(p_k p_l)⟨φ¹_k|φ¹_l⟩|`, zero exactly when the apparatus
    /// state is diagonal in the pointer basis.
    pub defect: f64,
    /// `Σ_{k≠l} √(p_k p_l)`, the weight of the off-diagonal pointer blocks of
    /// the composite state. The composite is a mixture of pointer-diagonal
    /// states only when this vanishes.
    pub coherence: f64,
    pub objectified: bool,
}

impl PremeasurementResult {
    /// Largest deviation between two results, over every field.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut d = (self.phi_end.amplitudes() - other.phi_end.amplitudes()).camax();
        d = d.max((self.apparatus_state.matrix() - other.apparatus_state.matrix()).camax());
        d = d.max((self.defect - other.defect).abs()).max((self.coherence - other.coherence).abs());
        for (a, b) in self.p.iter().zip(&other.p) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.phi1.iter().zip(&other.phi1) {
            match (a, b) {
                (Some(a), Some(b)) => d = d.max((a.amplitudes() - b.amplitudes()).camax()),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
        d
    }
}

/// Premeasurement with the canonical completion.
pub fn premeasure(spec: &BCLSpec, phi: &Ket) -> Result<PremeasurementResult> {
    premeasure_with(spec, &build_unitary(spec, Completion::Canonical), phi)
}

/// Evolves `φ⊗ψ` with `u` and decomposes the end state along the pointer kets.
pub fn premeasure_with(spec: &BCLSpec, u: &LinOp, phi: &Ket) -> Result<PremeasurementResult> {
    if phi.dim() != spec.system_dim {
        return Err(Error::DimensionMismatch { expected: spec.system_dim, got: phi.dim() });
    }
    phi.require_unit(1e-10)?;
    let phi = Ket::new(spec.system_space(), phi.amplitudes().clone())?;
    let phi_end = u.apply(&tensor(&phi, &spec.ready())?)?;
    let (ns, na) = (spec.system_dim, spec.apparatus_dim);
    let amps = phi_end.amplitudes();
    let mut p = Vec::with_capacity(spec.n_outcomes());
    let mut phi1 = Vec::with_capacity(spec.n_outcomes());
    let mut branches = Vec::with_capacity(spec.n_outcomes());
    for psi_k in &spec.pointers {
        // (1⊗⟨ψ_k|)Φ_end = √p_k φ¹_k
        let b = CVector::from_fn(ns, |i, _| (0..na).map(|a| psi_k[a].conj() * amps[i * na + a]).sum());
        let pk = b.norm_squared();
        phi1.push(if pk > 0.0 { Some(Ket::new(spec.system_space(), b.unscale(pk.sqrt()))?) } else { None });
        p.push(pk);
        branches.push(b);
    }
    let mut defect = 0.0;
    let mut coherence = 0.0;
    for k in 0..p.len() {
        for l in 0..p.len() {
            if k != l {
                defect += branches[l].dotc(&branches[k]).norm();
                coherence += (p[k] * p[l]).sqrt();
            }
        }
    }
    let apparatus_state = StateOperator::pure(&phi_end)?.partial_trace(&[1])?;
    Ok(PremeasurementResult { phi_end, p, phi1, apparatus_state, defect, coherence, objectified: coherence <= ORTH_TOL })
}

/// Final apparatus state `tr_S[U(T⊗|ψ⟩⟨ψ|)U†]` for a mixed system state.
pub fn apparatus_state(spec: &BCLSpec, u: &LinOp, t: &StateOperator) -> Result<StateOperator> {
    let t = StateOperator::new(LinOp::new(spec.system_space(), t.matrix().clone())?)?;
    let start = tensor(&t, &StateOperator::pure(&spec.ready())?)?;
    start.evolve(u)?.partial_trace(&[1])
}

/// `max_k |tr[T E_k] − ⟨ψ_k|T_A|ψ_k⟩|` with `T_A` the final apparatus state.
pub fn probability_reproducibility(spec: &BCLSpec, u: &LinOp, t: &StateOperator) -> Result<f64> {
    let ta = apparatus_state(spec, u, t)?;
    let mut worst = 0.0_f64;
    for k in 0..spec.n_outcomes() {
        let born = t.expectation_real(&LinOp::new(t.space().clone(), spec.eigenprojection(k).into_matrix())?)?;
        let pointer = ta.expectation_real(&spec.pointer(k).projector())?;
        worst = worst.max((born - pointer).abs());
    }
    Ok(worst)
}

/// Kraus operators `K_k = Σ_l |φ̃_kl⟩⟨φ_kl|` of the state transformer.
#[derive(Clone, Debug)]
pub struct StateTransformer {
    space: HilbertSpace,
    values: Vec<f64>,
    ks: Vec<LinOp>,
}

/// Outcome set as a subset of outcome indices.
pub type OutcomeSet = [bool];

impl StateTransformer {
    pub fn new(spec: &BCLSpec) -> Self {
        let space = spec.system_space();
        let ks = spec
            .groups
            .iter()
            .map(|g| {
                let mut m = CMatrix::zeros(spec.system_dim, spec.system_dim);
                for (v, t) in g.vectors.iter().zip(&g.targets) {
                    m += t * v.adjoint();
                }
                LinOp::new(space.clone(), m).expect("validated dimension")
            })
            .collect();
        Self { space, values: spec.values(), ks }
    }

    pub fn kraus(&self) -> &[LinOp] {
        &self.ks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max |Σ_k K_k†K_k − 1|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.space.dim();
        let mut s = -CMatrix::identity(n, n);
        for k in &self.ks {
            s += k.matrix().adjoint() * k.matrix();
        }
        s.camax()
    }

    /// `I(X)(T) = Σ_{o_k∈X} K_k T K_k†`, unnormalized.
    pub fn apply(&self, x: &OutcomeSet, t: &LinOp) -> Result<LinOp> {
        if x.len() != self.ks.len() {
            return Err(Error::DimensionMismatch { expected: self.ks.len(), got: x.len() });
        }
        if t.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), got: t.dim() });
        }
        let mut out = CMatrix::zeros(self.space.dim(), self.space.dim());
        for (k, _) in x.iter().enumerate().filter(|(_, &inside)| inside) {
            let km = self.ks[k].matrix();
            out += km * t.matrix() * km.adjoint();
        }
        LinOp::new(t.space().clone(), out)
    }

    /// Same as [`apply`](Self::apply) with the outcome set given by eigenvalues.
    pub fn apply_values(&self, x: &[f64], t: &LinOp) -> Result<LinOp> {
        if let Some(&bad) = x.iter().find(|v| !self.values.contains(v)) {
            return Err(Error::UnknownOutcome(vec![bad]));
        }
        let mask: Vec<bool> = self.values.iter().map(|v| x.contains(v)).collect();
        self.apply(&mask, t)
    }

    /// `max_{k,l} max_ij |(K_l K_k − δ_kl K_k)_ij|`.
    pub fn kraus_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (k, kk) in self.ks.iter().enumerate() {
            for (l, kl) in self.ks.iter().enumerate() {
                let mut m = kl.matrix() * kk.matrix();
                if k == l {
                    m -= kk.matrix();
                }
                worst = worst.max(m.camax());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepeatabilityReport {
    pub repeatable: bool,
    /// Entrywise `K_l K_k − δ_kl K_k`.
    pub kraus_violation: f64,
    /// `max |tr[I(Y)(I(X)T)] − tr[I(X∩Y)T]|` over the random trials.
    pub repeat_violation: f64,
}

/// Checks `K_l K_k = δ_kl K_k` and the repeatability identity on `trials`
/// random states and outcome sets.
pub fn repeatability_check(tr: &StateTransformer, trials: usize, seed: u64) -> Result<RepeatabilityReport> {
    let kraus_violation = tr.kraus_violation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tr.ks.len();
    let mut repeat_violation = 0.0_f64;
    for _ in 0..trials {
        let t = random::state(&mut rng, tr.space.clone());
        let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let both: Vec<bool> = x.iter().zip(&y).map(|(a, b)| *a && *b).collect();
        let lhs = tr.apply(&y, &tr.apply(&x, t.op())?)?.trace();
        let rhs = tr.apply(&both, t.op())?.trace();
        repeat_violation = repeat_violation.max((lhs - rhs).norm());
    }
    Ok(RepeatabilityReport { repeatable: kraus_violation <= REPEAT_TOL, kraus_violation, repeat_violation })
}

/// Orthonormal `dim × cols` frame from the QR factor of a Ginibre matrix.
fn random_frame<R: Rng + ?Sized>(rng: &mut R, dim: usize, cols: usize) -> CMatrix {
    let u = random::unitary(rng, HilbertSpace::single("X", dim).expect("positive dimension"));
    u.matrix().columns(0, cols).into_owned()
}

/// Random valid spec with the given group sizes. Eigenvectors, targets and
/// pointer kets are Haar-random frames; `von_neumann` sets `φ̃ = φ`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, group_sizes: &[usize], apparatus_dim: usize, von_neumann: bool) -> Result<BCLSpec> {
    let n: usize = group_sizes.iter().sum();
    if n == 0 || group_sizes.contains(&0) {
        return Err(Error::InvalidParameter("group sizes must be positive".into()));
    }
    if apparatus_dim < group_sizes.len() + 1 {
        return Err(Error::InvalidParameter("apparatus too small for the pointer states".into()));
    }
    let basis = random_frame(rng, n, n);
    let mut groups = Vec::with_capacity(group_sizes.len());
    let mut c = 0;
    for (k, &g) in group_sizes.iter().enumerate() {
        let vectors: Vec<CVector> = (c..c + g).map(|j| basis.column(j).into_owned()).collect();
        let targets = if von_neumann {
            vectors.clone()
        } else {
            let f = random_frame(rng, n, g);
            (0..g).map(|j| f.column(j).into_owned()).collect()
        };
        groups.push(EigenGroup { value: (k + 1) as f64, vectors, targets });
        c += g;
    }
    let app = random_frame(rng, apparatus_dim, group_sizes.len() + 1);
    let pointers = (1..=group_sizes.len()).map(|j| app.column(j).into_owned()).collect();
    BCLSpec::new(n, apparatus_dim, groups, app.column(0).into_owned(), pointers)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    value: f64,
    eigenvectors: Vec<Vec<[f64; 2]>>,
    targets: Vec<Vec<[f64; 2]>>,
}

/// JSON layout; complex numbers are `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    system_dim: usize,
    apparatus_dim: usize,
    groups: Vec<GroupFile>,
    ready: Vec<[f64; 2]>,
    pointers: Vec<Vec<[f64; 2]>>,
}

fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)))
}

impl TryFrom<SpecFile> for BCLSpec {
    type Error = Error;

    fn try_from(f: SpecFile) -> Result<Self> {
        let groups = f
            .groups
            .iter()
            .map(|g| EigenGroup {
                value: g.value,
                vectors: g.eigenvectors.iter().map(|v| from_pairs(v)).collect(),
                targets: g.targets.iter().map(|v| from_pairs(v)).collect(),
            })
            .collect();
        let pointers = f.pointers.iter().map(|v| from_pairs(v)).collect();
        BCLSpec::new(f.system_dim, f.apparatus_dim, groups, from_pairs(&f.ready), pointers)
    }
}

impl From<BCLSpec> for SpecFile {
    fn from(s: BCLSpec) -> Self {
        SpecFile {
            system_dim: s.system_dim,
            apparatus_dim: s.apparatus_dim,
            groups: s
                .groups
                .iter()
                .map(|g| GroupFile {
                    value: g.value,
                    eigenvectors: g.vectors.iter().map(to_pairs).collect(),
                    targets: g.targets.iter().map(to_pairs).collect(),
                })
                .collect(),
            ready: to_pairs(&s.ready),
            pointers: s.pointers.iter().map(to_pairs).collect(),
        }
    }
}

impl BCLSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
