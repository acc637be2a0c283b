use super::Files;
use crate::config::ClassicalLimitConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::io::write_csv;
use mep_qlab::mepacket::{
    classical_limit_report, classical_partition, limit_deviation, quantum_multipliers, quantum_partition, MEPacketParams,
};
use serde_json::json;
use std::f64::consts::PI;

/// `Z_cl/Z_q` at `v = 2πħ` for a packet with uncertainty product `ν ħ/2`.
fn partition_ratio(nu: f64) -> Result<f64, CliError> {
    let dq = 1.0;
    let params = MEPacketParams::new(0.0, 0.0, dq, nu / (2.0 * dq), 1.0, 2.0 * PI)?;
    let l = quantum_multipliers(&params)?;
    Ok(classical_partition(l, params.v)? / quantum_partition(l, params.hbar)?)
}

pub fn run(cfg: &ClassicalLimitConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    let mut nus = cfg.nus.clone();
    if nus.len() < 2 || nus.iter().any(|&nu| !(nu > 1.0)) {
        return Err(CliError::Config("classical-limit-table: need at least two values of nu, all above 1".into()));
    }
    nus.sort_by(f64::total_cmp);
    nus.dedup();
    let mut files = Files::default();
    let report = classical_limit_report(&nus)?;
    let z: Vec<f64> = nus.iter().map(|&nu| partition_ratio(nu)).collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = report
        .iter()
        .zip(&z)
        .map(|(r, &zr)| vec![r.nu, r.x, r.deviation, r.asymptote, r.ratio, zr])
        .collect();
    write_csv(files.add(ctx, "classical_limit.csv"), &["nu", "x", "deviation", "asymptote", "asymptote_ratio", "z_ratio"], &rows)?;

    let identity_err = report
        .iter()
        .zip(&z)
        .map(|(r, &zr)| (zr - 1.0 - r.deviation).abs() / zr)
        .fold(0.0, f64::max);
    let monotone = z.windows(2).all(|w| w[1] < w[0]) && z.iter().all(|&r| r > 1.0);
    let d100 = limit_deviation(100.0)?;
    let d3 = limit_deviation(3.0)?;
    let last = report.last().expect("at least two rows");

    let checks = vec![
        Check::below("sinh(x)/x − 1 at ν = 100", d100, cfg.tol_nu100),
        Check::below("sinh(x)/x − 1 at ν = 3", d3, cfg.tol_nu3),
        Check::flag("Z_cl/Z_q decreases monotonically towards 1", monotone),
        Check::below("max |Z_cl/Z_q − 1 − (sinh(x)/x − 1)| / (Z_cl/Z_q)", identity_err, cfg.identity_tol),
        Check::below(&format!("|deviation·6ν² − 1| at ν = {}", last.nu), (last.ratio - 1.0).abs(), 0.01),
    ];
    let results = json!({ "deviation_nu100": d100, "deviation_nu3": d3, "identity_max_err": identity_err, "z_ratio": z });
    Ok(Summary::new(
        "classical-limit-table",
        ctx.seed,
        vec![CriterionResult::new(10, "classical limit of the partition function", checks)],
        files.0,
        results,
    ))
}
