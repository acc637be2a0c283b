use super::Files;
use crate::config::ChainConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::chain::{gibbs_length_variance, length_statistics, scaling_slope, scaling_study, write_scaling_csv, ChainParams};
use serde_json::json;

pub fn run(cfg: &ChainConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    if cfg.log2_n_min > cfg.log2_n_max || cfg.log2_n_max > 30 {
        return Err(CliError::Config(format!(
            "chain-scaling: need log2_n_min ≤ log2_n_max ≤ 30, got {} and {}",
            cfg.log2_n_min, cfg.log2_n_max
        )));
    }
    let mut files = Files::default();
    let base = ChainParams::new(2, cfg.mu, cfg.kappa, cfg.xi, cfg.lambda, cfg.hbar)?;
    let ns: Vec<usize> = (cfg.log2_n_min..=cfg.log2_n_max).map(|k| 1usize << k).collect();
    let rows = scaling_study(&base, &ns)?;
    write_scaling_csv(files.add(ctx, "scaling.csv"), &rows)?;

    let length_err = rows.iter().map(|r| (r.l_avg - (r.n - 1) as f64 * cfg.xi).abs()).fold(0.0, f64::max);
    let slope = scaling_slope(&rows)?;
    let last = rows.last().expect("at least one chain size");

    let small = base.with_n(4)?;
    let mode_sum = length_statistics(&small).dl.powi(2);
    let brute = gibbs_length_variance(&small, cfg.oracle_levels)?;

    let checks = vec![
        Check::below("max |⟨L⟩ − (N−1)ξ|", length_err, cfg.length_tol),
        Check::near("slope of ln(ΔL/⟨L⟩) vs ln N", slope, -0.5, cfg.slope_tol),
        Check::below(&format!("|ratio/asymptote − 1| at N = {}", last.n), last.rel_err.abs(), cfg.prefactor_tol),
        Check::near("N = 4 Gibbs trace ΔL² vs mode sum", brute, mode_sum, cfg.oracle_tol),
    ];
    let results = json!({
        "slope": slope,
        "largest_n": last.n,
        "prefactor_rel_err": last.rel_err,
        "n4_mode_sum": mode_sum,
        "n4_gibbs": brute,
    });
    Ok(Summary::new(
        "chain-scaling",
        ctx.seed,
        vec![CriterionResult::new(3, "chain length fluctuations", checks)],
        files.0,
        results,
    ))
}
