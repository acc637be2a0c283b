use super::Files;
use crate::config::JointConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::grid::{Grid1D, GridWavefunction};
use mep_qlab::io::write_csv;
use mep_qlab::jointqp::{convergence_study, write_cells_csv, AncillaPacket, CellGrid, JointLattice};
use serde_json::json;

pub fn run(cfg: &JointConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    let mut files = Files::default();
    let grid = Grid1D::centered(0.0, cfg.dx, cfg.n, cfg.hbar)?;
    let anc = AncillaPacket::new(grid, cfg.sigma)?;
    let ts = GridWavefunction::gaussian(grid, cfg.q, cfg.p, cfg.dq)?.density()?;

    // exact distribution on a grid that tiles the whole lattice
    let lattice = JointLattice::new(&ts, &anc)?;
    let cover = CellGrid::covering(grid, cfg.a_step, cfg.b_step)?;
    let cover_sum: f64 = lattice.probabilities(&cover)?.iter().sum();

    let base = CellGrid::centered(grid, (cfg.q, cfg.p), (cfg.a_step, cfg.b_step), (cfg.a_cells, cfg.b_cells))?;
    let study = convergence_study(&ts, &anc, &base, cfg.halvings)?;
    for (h, rows) in study.rows.iter().enumerate() {
        write_cells_csv(files.add(ctx, &format!("cells_level{h}.csv")), rows)?;
    }
    let levels: Vec<Vec<f64>> = study
        .levels
        .iter()
        .map(|l| {
            vec![
                l.halvings as f64,
                l.n_cells as f64,
                l.cell_area,
                l.sum_exact,
                l.leakage,
                l.ratio,
                l.max_err_raw,
                l.max_err_calibrated,
            ]
        })
        .collect();
    write_csv(
        files.add(ctx, "convergence.csv"),
        &["halvings", "n_cells", "cell_area", "sum_exact", "leakage", "ratio", "max_err_raw", "max_err_calibrated"],
        &levels,
    )?;

    // shifted and boosted ancilla at the centres of the base cells
    let mut moment_rows = Vec::new();
    let mut moment_err = 0.0_f64;
    for cell in base.cells() {
        let (a, b) = cell.center();
        let got = anc.moments(a, b);
        let want = anc.expected_moments(a, b);
        for (g, w) in got.iter().zip(&want) {
            moment_err = moment_err.max((g - w).abs());
        }
        let mut row = vec![a, b];
        row.extend_from_slice(&got);
        row.extend_from_slice(&want);
        moment_rows.push(row);
    }
    write_csv(
        files.add(ctx, "moments.csv"),
        &["a", "b", "Q", "P", "dQ", "dP", "Q_expected", "P_expected", "dQ_expected", "dP_expected"],
        &moment_rows,
    )?;

    let checks = vec![
        Check::near("covering-grid sum of exact probabilities", cover_sum, 1.0, cfg.sum_tol),
        Check::flag("max |p_exact − p_approx_raw| decreases under halving", study.raw_monotone()),
        Check::flag("max |p_exact − p_approx_calibrated| decreases under halving", study.calibrated_monotone()),
        Check::below("max ancilla moment error", moment_err, cfg.moment_tol),
    ];
    let results = json!({
        "covering_sum": cover_sum,
        "global_ratio": study.global_ratio,
        "ratio_over_2pi_hbar": study.global_ratio / (2.0 * std::f64::consts::PI * cfg.hbar),
        "max_err_raw": study.levels.iter().map(|l| l.max_err_raw).collect::<Vec<_>>(),
        "max_err_calibrated": study.levels.iter().map(|l| l.max_err_calibrated).collect::<Vec<_>>(),
        "moment_max_err": moment_err,
    });
    Ok(Summary::new(
        "jointqp-convergence",
        ctx.seed,
        vec![CriterionResult::new(9, "joint position-momentum POVM", checks)],
        files.0,
        results,
    ))
}
