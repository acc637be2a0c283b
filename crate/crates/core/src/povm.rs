//! Discrete POV measures: effects, Born-rule probabilities, eigenstates,
//! joint measurability and uncertainty relations.

use crate::error::{Error, Result};
use crate::hilbert::linop::max_abs;
use crate::hilbert::{variance, CMatrix, HilbertSpace, LinOp, StateOperator, C64};
use serde::{Deserialize, Serialize};

/// Outcome label: a point of the value space `Ω ⊂ ℝⁿ`.
pub type Outcome = Vec<f64>;

const SPECTRUM_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;
const PROJECTION_TOL: f64 = 1e-9;
const COMMUTE_TOL: f64 = 1e-10;

/// Hermitian operator with `0 ≤ E ≤ 1`.
#[derive(Clone, Debug)]
pub struct Effect {
    op: LinOp,
    projection: bool,
}

impl Effect {
    pub fn new(op: LinOp) -> Result<Self> {
        op.require_hermitian(crate::hilbert::tol::HERMITIAN)?;
        let m = op.matrix();
        let n = m.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
        let values: Vec<f64> = if diagonal {
            (0..n).map(|i| m[(i, i)].re).collect()
        } else {
            op.eigh()?.values
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min < -SPECTRUM_TOL || max > 1.0 + SPECTRUM_TOL {
            return Err(Error::NotAnEffect { min, max });
        }
        let projection = values
            .iter()
            .all(|v| v.abs() < PROJECTION_TOL || (v - 1.0).abs() < PROJECTION_TOL);
        Ok(Self { op, projection })
    }

    pub fn zero(space: HilbertSpace) -> Self {
        Self { op: LinOp::zeros(space), projection: true }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self { op: LinOp::identity(space), projection: true }
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn is_projection(&self) -> bool {
        self.projection
    }

    /// `1 − E`
    pub fn complement(&self) -> Self {
        let op = LinOp::identity(self.op.space().clone()).sub(&self.op).expect("same space");
        Self { op, projection: self.projection }
    }

    pub fn commutes_with(&self, other: &Effect) -> Result<bool> {
        Ok(commutator_norm(&self.op, &other.op)? <= COMMUTE_TOL)
    }
}

fn commutator_norm(a: &LinOp, b: &LinOp) -> Result<f64> {
    Ok(max_abs(a.commutator(b)?.matrix()))
}

/// Discrete POV measure: outcome labels with effects summing to the identity.
#[derive(Clone, Debug)]
pub struct DiscretePOVM {
    dim: usize,
    outcomes: Vec<Outcome>,
    effects: Vec<Effect>,
}

impl DiscretePOVM {
    pub fn new(outcomes: Vec<Outcome>, effects: Vec<Effect>) -> Result<Self> {
        if outcomes.len() != effects.len() {
            return Err(Error::DimensionMismatch { expected: outcomes.len(), got: effects.len() });
        }
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidParameter("POVM needs at least one outcome".into()))?;
        let dim = first.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
            sum += e.op.matrix();
        }
        for (i, o) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(o) {
                return Err(Error::InvalidParameter(format!("duplicate outcome {o:?}")));
            }
        }
        let dev = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if dev > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { dim, outcomes, effects })
    }

    /// Spectral measure of a Hermitian observable; eigenvalues closer than
    /// `1e-9` are grouped into one outcome.
    pub fn from_observable(a: &LinOp) -> Result<Self> {
        let e = a.eigh()?;
        let space = a.space().clone();
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &v) in e.values.iter().enumerate() {
            match groups.last_mut() {
                Some((val, idx)) if (v - *val).abs() < 1e-9 => idx.push(i),
                _ => groups.push((v, vec![i])),
            }
        }
        let mut outcomes = Vec::with_capacity(groups.len());
        let mut effects = Vec::with_capacity(groups.len());
        for (val, idx) in groups {
            let mut p = CMatrix::zeros(a.dim(), a.dim());
            for i in idx {
                let v = e.vectors.column(i);
                p += &v * v.adjoint();
            }
            outcomes.push(vec![val]);
            effects.push(Effect::new(LinOp::new(space.clone(), p)?)?);
        }
        Self::new(outcomes, effects)
    }

    /// Projections onto an orthonormal basis given by the columns of `basis`.
    pub fn from_basis(space: HilbertSpace, basis: &CMatrix, values: &[f64]) -> Result<Self> {
        if basis.ncols() != values.len() {
            return Err(Error::DimensionMismatch { expected: basis.ncols(), got: values.len() });
        }
        let mut effects = Vec::new();
        for j in 0..basis.ncols() {
            let v = basis.column(j);
            effects.push(Effect::new(LinOp::new(space.clone(), &v * v.adjoint())?)?);
        }
        Self::new(values.iter().map(|&v| vec![v]).collect(), effects)
    }

    /// `{ω ↦ 1}`
    pub fn trivial(space: HilbertSpace) -> Self {
        Self { dim: space.dim(), outcomes: vec![vec![0.0]], effects: vec![Effect::identity(space)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn is_sharp(&self) -> bool {
        self.effects.iter().all(Effect::is_projection)
    }

    fn index_of(&self, label: &[f64]) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o.as_slice() == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_vec()))
    }

    /// `E(X)` for a set of outcome labels (duplicates count once).
    pub fn effect_of(&self, set: &[Outcome]) -> Result<Effect> {
        let mut idx: Vec<usize> = set.iter().map(|o| self.index_of(o)).collect::<Result<_>>()?;
        idx.sort_unstable();
        idx.dedup();
        let space = self.effects[0].op.space().clone();
        let mut acc = LinOp::zeros(space);
        for i in idx {
            acc = acc.add(&self.effects[i].op)?;
        }
        Effect::new(acc)
    }

    /// `tr[T E(X)]`
    pub fn probability(&self, t: &StateOperator, set: &[Outcome]) -> Result<f64> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.dim() });
        }
        let mut idx: Vec<usize> = set.iter().map(|o| self.index_of(o)).collect::<Result<_>>()?;
        idx.sort_unstable();
        idx.dedup();
        let mut p = 0.0;
        for i in idx {
            p += t.expectation_real(&self.effects[i].op)?;
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Probability of each outcome, in outcome order.
    pub fn distribution(&self, t: &StateOperator) -> Result<Vec<f64>> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.dim() });
        }
        self.effects.iter().map(|e| Ok(t.expectation_real(&e.op)?.clamp(0.0, 1.0))).collect()
    }

    /// `n`-th moment operator `Σ_ω ω₁ⁿ E({ω})` of the first label component.
    pub fn moment_operator(&self, n: i32) -> LinOp {
        let space = self.effects[0].op.space().clone();
        self.outcomes
            .iter()
            .zip(&self.effects)
            .fold(LinOp::zeros(space), |acc, (o, e)| acc.add(&e.op.scale_real(o[0].powi(n))).expect("same space"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PovmDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PovmDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Serialized POVM: effects are flattened row-major as `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmDocument {
    dim: usize,
    outcomes: Vec<Outcome>,
    effects: Vec<Vec<[f64; 2]>>,
}

impl From<&DiscretePOVM> for PovmDocument {
    fn from(p: &DiscretePOVM) -> Self {
        let d = p.dim;
        let effects = p
            .effects
            .iter()
            .map(|e| {
                let m = e.op.matrix();
                (0..d * d).map(|k| {
                    let z = m[(k / d, k % d)];
                    [z.re, z.im]
                })
                .collect()
            })
            .collect();
        Self { dim: d, outcomes: p.outcomes.clone(), effects }
    }
}

impl TryFrom<PovmDocument> for DiscretePOVM {
    type Error = Error;

    fn try_from(doc: PovmDocument) -> Result<Self> {
        let d = doc.dim;
        let space = HilbertSpace::single("system", d)?;
        let effects = doc
            .effects
            .iter()
            .map(|flat| {
                if flat.len() != d * d {
                    return Err(Error::DimensionMismatch { expected: d * d, got: flat.len() });
                }
                let m = CMatrix::from_fn(d, d, |r, c| {
                    let [re, im] = flat[r * d + c];
                    C64::new(re, im)
                });
                Effect::new(LinOp::new(space.clone(), m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        DiscretePOVM::new(doc.outcomes, effects)
    }
}

/// Eigenstate test for an effect.
///
/// Returns `(true, 1)` when `E T = T`, `(true, 0)` when `E T = 0`, and
/// `(false, tr[TE])` otherwise.
pub fn is_eigenstate(e: &Effect, t: &StateOperator) -> Result<(bool, f64)> {
    let p = t.expectation_real(&e.op)?;
    let et = e.op.matrix() * t.matrix();
    if max_abs(&(&et - t.matrix())) < 1e-10 {
        return Ok((true, 1.0));
    }
    if max_abs(&et) < 1e-10 {
        return Ok((true, 0.0));
    }
    Ok((false, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointStatus {
    JointlyMeasurable,
    Unknown,
}

/// Decomposition `E₁ = E′₁ + E′₁₂`, `E₂ = E′₂ + E′₁₂`.
#[derive(Clone, Debug)]
pub struct JointWitness {
    pub e1: Effect,
    pub e2: Effect,
    pub e12: Effect,
}

#[derive(Clone, Debug)]
pub struct JointVerdict {
    pub status: JointStatus,
    pub witness: Option<JointWitness>,
}

/// Decides joint measurability through the two sufficient conditions:
/// commuting projections, or `E₁ + E₂ ≤ 1`. Anything else is `Unknown`.
pub fn jointly_measurable(e1: &Effect, e2: &Effect) -> Result<JointVerdict> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch { expected: e1.dim(), got: e2.dim() });
    }
    let space = e1.op.space().clone();
    if e1.is_projection() && e2.is_projection() && e1.commutes_with(e2)? {
        let prod = e1.op.compose(&e2.op)?;
        let prod = LinOp::new(space.clone(), (prod.matrix() + prod.matrix().adjoint()).unscale(2.0))?;
        let witness = JointWitness {
            e1: Effect::new(e1.op.sub(&prod)?)?,
            e2: Effect::new(e2.op.sub(&prod)?)?,
            e12: Effect::new(prod)?,
        };
        return Ok(JointVerdict { status: JointStatus::JointlyMeasurable, witness: Some(witness) });
    }
    let sum = e1.op.add(&e2.op)?;
    if sum.eigh()?.values.last().copied().unwrap_or(0.0) <= 1.0 + SPECTRUM_TOL {
        let witness = JointWitness { e1: e1.clone(), e2: e2.clone(), e12: Effect::zero(space) };
        return Ok(JointVerdict { status: JointStatus::JointlyMeasurable, witness: Some(witness) });
    }
    Ok(JointVerdict { status: JointStatus::Unknown, witness: None })
}

/// Compound of two sharp POVMs with pairwise commuting effects; outcome
/// labels are concatenated.
pub fn compound(a: &DiscretePOVM, b: &DiscretePOVM) -> Result<DiscretePOVM> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let mut outcomes = Vec::new();
    let mut effects = Vec::new();
    for (oa, ea) in a.outcomes.iter().zip(&a.effects) {
        for (ob, eb) in b.outcomes.iter().zip(&b.effects) {
            let c = commutator_norm(&ea.op, &eb.op)?;
            if c > COMMUTE_TOL {
                return Err(Error::NonCommuting(c));
            }
            let p = ea.op.compose(&eb.op)?;
            let p = LinOp::new(p.space().clone(), (p.matrix() + p.matrix().adjoint()).unscale(2.0))?;
            outcomes.push(oa.iter().chain(ob).copied().collect());
            effects.push(Effect::new(p)?);
        }
    }
    DiscretePOVM::new(outcomes, effects)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyCheck {
    /// `ΔA ΔB`
    pub lhs: f64,
    /// `|tr[T[A,B]]| / 2`
    pub rhs: f64,
    pub holds: bool,
}

pub fn uncertainty_check(a: &LinOp, b: &LinOp, t: &StateOperator) -> Result<UncertaintyCheck> {
    let lhs = variance(a, t)? * variance(b, t)?;
    let rhs = t.expectation(&a.commutator(b)?)?.norm() / 2.0;
    Ok(UncertaintyCheck { lhs, rhs, holds: lhs >= rhs - 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Ket, SpinOps};

    fn sp(d: usize) -> HilbertSpace {
        HilbertSpace::single("a", d).unwrap()
    }

    #[test]
    fn effect_rejects_out_of_range_spectrum() {
        assert!(Effect::new(LinOp::from_real_diagonal(sp(2), &[1.2, 0.0]).unwrap()).is_err());
        assert!(Effect::new(LinOp::from_real_diagonal(sp(2), &[-0.1, 0.0]).unwrap()).is_err());
        let e = Effect::new(LinOp::from_real_diagonal(sp(2), &[0.3, 1.0]).unwrap()).unwrap();
        assert!(!e.is_projection());
        let p = Effect::new(LinOp::from_real_diagonal(sp(2), &[0.0, 1.0]).unwrap()).unwrap();
        assert!(p.is_projection());
    }

    #[test]
    fn povm_requires_normalization() {
        let half = Effect::new(LinOp::identity(sp(2)).scale_real(0.5)).unwrap();
        assert!(DiscretePOVM::new(vec![vec![0.0], vec![1.0]], vec![half.clone(), half.clone()]).is_ok());
        assert!(matches!(
            DiscretePOVM::new(vec![vec![0.0]], vec![half]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn eigenstate_cases() {
        let k0 = Ket::basis(sp(2), 0).unwrap();
        let k1 = Ket::basis(sp(2), 1).unwrap();
        let e = Effect::new(k0.projector()).unwrap();
        assert_eq!(is_eigenstate(&e, &StateOperator::pure(&k0).unwrap()).unwrap(), (true, 1.0));
        assert_eq!(is_eigenstate(&e, &StateOperator::pure(&k1).unwrap()).unwrap(), (true, 0.0));
        let (ok, p) = is_eigenstate(&e, &StateOperator::maximally_mixed(sp(2))).unwrap();
        assert!(!ok && (p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn joint_measurability_verdicts() {
        let half = Effect::new(LinOp::identity(sp(2)).scale_real(0.5)).unwrap();
        let v = jointly_measurable(&half, &half).unwrap();
        assert_eq!(v.status, JointStatus::JointlyMeasurable);
        assert!(v.witness.unwrap().e12.op().max_abs_entry() == 0.0);

        let p = Effect::new(LinOp::from_real_diagonal(sp(3), &[1.0, 1.0, 0.0]).unwrap()).unwrap();
        let q = Effect::new(LinOp::from_real_diagonal(sp(3), &[0.0, 1.0, 1.0]).unwrap()).unwrap();
        let v = jointly_measurable(&p, &q).unwrap();
        assert_eq!(v.status, JointStatus::JointlyMeasurable);
        let w = v.witness.unwrap();
        let pq = p.op().compose(q.op()).unwrap();
        assert!(max_abs(&(w.e12.op().matrix() - pq.matrix())) < 1e-15);

        let s = SpinOps::half(1.0);
        let up_z = Ket::basis(s.space().clone(), 0).unwrap();
        let up_x = up_z.add(&Ket::basis(s.space().clone(), 1).unwrap()).unwrap().normalized().unwrap();
        let v = jointly_measurable(&Effect::new(up_z.projector()).unwrap(), &Effect::new(up_x.projector()).unwrap()).unwrap();
        assert_eq!(v.status, JointStatus::Unknown);
        assert!(v.witness.is_none());
    }

    #[test]
    fn uncertainty_equality_for_spin_up() {
        let s = SpinOps::half(1.0);
        let t = StateOperator::pure(&Ket::basis(s.space().clone(), 0).unwrap()).unwrap();
        let u = uncertainty_check(&s.s1, &s.s2, &t).unwrap();
        assert!((u.lhs - 0.25).abs() < 1e-15);
        assert!((u.rhs - 0.25).abs() < 1e-15);
        assert!(u.holds);
    }

    #[test]
    fn json_roundtrip() {
        let s = SpinOps::half(1.0);
        let p = DiscretePOVM::from_observable(&s.s2).unwrap();
        let text = p.to_json().unwrap();
        let back = DiscretePOVM::from_json(&text).unwrap();
        assert_eq!(back.outcomes(), p.outcomes());
        for (a, b) in back.effects().iter().zip(p.effects()) {
            assert_eq!(a.op().matrix(), b.op().matrix());
        }
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["effects"][0].as_array().unwrap().len(), 4);
    }

    #[test]
    fn unknown_label_is_error() {
        let p = DiscretePOVM::trivial(sp(2));
        let t = StateOperator::maximally_mixed(sp(2));
        assert!(matches!(p.probability(&t, &[vec![7.0]]), Err(Error::UnknownOutcome(_))));
        assert!((p.probability(&t, &[vec![0.0]]).unwrap() - 1.0).abs() < 1e-15);
    }
}
