use super::Files;
use crate::config::LocalityConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::grid::{cluster_separability_check, position_pvm, Cell, Grid1D, GridWavefunction, KernelOp, RegionMask};
use mep_qlab::hilbert::{StateOperator, Symmetry};
use mep_qlab::io::write_csv;
use mep_qlab::povm::Effect;
use serde_json::json;

fn cut_packet(grid: Grid1D, q: f64, p: f64, dq: f64, mask: &RegionMask) -> Result<StateOperator, CliError> {
    let w = GridWavefunction::gaussian(grid, q, p, dq)?
        .windowed(|j| if mask.contains(j) { 1.0 } else { 0.0 })
        .normalized()?;
    Ok(w.density()?)
}

pub fn run(cfg: &LocalityConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    if cfg.n == 0 {
        return Err(CliError::Config("locality-check: n must be positive".into()));
    }
    let mut files = Files::default();
    let grid = Grid1D::centered(0.0, cfg.extent / cfg.n as f64, cfg.n, cfg.hbar)?;
    let d1 = RegionMask::interval(&grid, cfg.d1_lo, cfg.d1_hi);
    let d2 = RegionMask::interval(&grid, cfg.d2_lo, cfg.d2_hi);
    let t1 = cut_packet(grid, cfg.q1, cfg.p1, cfg.dq1, &d1)?;
    let t2 = cut_packet(grid, cfg.q2, cfg.p2, cfg.dq2, &d2)?;

    let pvm = position_pvm(
        &grid,
        &[Cell::new(f64::NEG_INFINITY, cfg.cell_lo), Cell::new(cfg.cell_lo, cfg.cell_hi), Cell::new(cfg.cell_hi, f64::INFINITY)],
    )?;
    let local = KernelOp::from_linop(grid, pvm.effects()[1].op())?.d_localise(&d1)?;
    let effect = Effect::new(local.to_linop())?;

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    for (kind, eps, label) in [(Symmetry::Symmetric, 1.0, "bosons"), (Symmetry::Antisymmetric, -1.0, "fermions")] {
        let c = cluster_separability_check(&t1, &t2, &effect, &d1, &d2, kind)?;
        rows.push(vec![eps, c.lhs, c.rhs, (c.lhs - c.rhs).abs(), c.normalization]);
        checks.push(Check::below(&format!("{label}: |lhs − rhs|"), (c.lhs - c.rhs).abs(), cfg.tol));
        checks.push(Check::near(&format!("{label}: tr[P(T1⊗T2)P]"), c.normalization, 0.5, cfg.norm_tol));
        results.insert(label.into(), json!({ "lhs": c.lhs, "rhs": c.rhs, "normalization": c.normalization }));
    }
    write_csv(files.add(ctx, "cluster.csv"), &["epsilon", "lhs", "rhs", "abs_diff", "normalization"], &rows)?;
    Ok(Summary::new(
        "locality-check",
        ctx.seed,
        vec![CriterionResult::new(8, "cluster separability of disjoint packets", checks)],
        files.0,
        results.into(),
    ))
}
