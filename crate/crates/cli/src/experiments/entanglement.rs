use super::Files;
use crate::config::EntanglementConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::hilbert::{normalized_correlation, HilbertSpace, Ket, LinOp, StateOperator, Tensor};
use mep_qlab::io::write_csv;
use serde_json::json;

pub fn run(cfg: &EntanglementConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    let mut files = Files::default();
    let s1 = HilbertSpace::single("S1", 2)?;
    let s2 = HilbertSpace::single("S2", 2)?;
    // Ψ = (|a₁ b₂⟩ + |b₁ a₂⟩)/√2
    let ab = Ket::basis(s1.clone(), 0)?.tensor(&Ket::basis(s2.clone(), 1)?)?;
    let ba = Ket::basis(s1.clone(), 1)?.tensor(&Ket::basis(s2.clone(), 0)?)?;
    let t = StateOperator::pure(&ab.add(&ba)?.normalized()?)?;
    let big_a1 = LinOp::from_real_diagonal(s1.clone(), &[cfg.a1, cfg.b1])?.tensor(&LinOp::identity(s2.clone()))?;
    let big_a2 = LinOp::identity(s1.clone()).tensor(&LinOp::from_real_diagonal(s2.clone(), &[cfg.a2, cfg.b2])?)?;
    let c = normalized_correlation(&big_a1, &big_a2, &t)?;

    let v1 = [cfg.a1, cfg.b1];
    let v2 = [cfg.a2, cfg.b2];
    let mut probs = Vec::with_capacity(4);
    let mut rows = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let e = Ket::basis(s1.clone(), i)?.projector().tensor(&Ket::basis(s2.clone(), j)?.projector())?;
            let p = t.expectation_real(&e)?;
            probs.push(p);
            rows.push(vec![v1[i], v2[j], p]);
        }
    }
    write_csv(files.add(ctx, "probabilities.csv"), &["A1", "A2", "probability"], &rows)?;

    let want = [0.0, 0.5, 0.5, 0.0];
    let prob_err = probs.iter().zip(want).map(|(p, w)| (p - w).abs()).fold(0.0, f64::max);
    let checks = vec![
        Check::near("C(A1⊗1, 1⊗A2, P[Ψ])", c, -1.0, cfg.tol),
        Check::below("max |p − {0, ½, ½, 0}|", prob_err, cfg.tol),
    ];
    let results = json!({
        "correlation": c,
        "outcomes": [[cfg.a1, cfg.a2], [cfg.a1, cfg.b2], [cfg.b1, cfg.a2], [cfg.b1, cfg.b2]],
        "probabilities": probs,
    });
    Ok(Summary::new(
        "entanglement-demo",
        ctx.seed,
        vec![CriterionResult::new(4, "correlation of the entangled pair", checks)],
        files.0,
        results,
    ))
}
