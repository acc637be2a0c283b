use super::Files;
use crate::config::EvolveConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::dynamics::{
    closed_form_trajectory, fock_quantum_oracle, mc_classical_oracle, time_grid, Flow, QuadraticPotential,
};
use mep_qlab::mepacket::MEPacketParams;
use serde_json::json;

pub fn run(cfg: &EvolveConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    let mut files = Files::default();
    let params = MEPacketParams::new(cfg.q, cfg.p, cfg.dq, cfg.dp, cfg.hbar, cfg.v)?;
    let times = time_grid(cfg.t_max, cfg.n_times);
    let presets = [
        ("harmonic", QuadraticPotential::harmonic(cfg.mu, cfg.v2)?),
        ("free", QuadraticPotential::free(cfg.mu)?),
    ];
    let mut match_checks = Vec::new();
    let mut results = serde_json::Map::new();
    for (i, (name, pot)) in presets.iter().enumerate() {
        let cf = closed_form_trajectory(&params, pot, &times)?;
        let fock = fock_quantum_oracle(&params, pot, &times, None)?;
        let mc = mc_classical_oracle(&params, &Flow::Quadratic(*pot), &times, cfg.samples, ctx.seed().wrapping_add(i as u64))?;
        cf.write_csv(files.add(ctx, &format!("{name}_closed_form.csv")))?;
        fock.trajectory.write_csv(files.add(ctx, &format!("{name}_fock.csv")))?;
        mc.write_csv(files.add(ctx, &format!("{name}_mc.csv")))?;
        let err = fock.trajectory.max_abs_diff(&cf)?;
        let z = mc.max_z_score(&cf)?;
        match_checks.push(Check::below(&format!("{name}: max |fock − closed form|"), err, cfg.fock_tol));
        match_checks.push(Check::below(&format!("{name}: max MC z-score"), z, cfg.z_max));
        results.insert(
            (*name).into(),
            json!({ "fock_max_abs_err": err, "fock_dim": fock.dim, "mc_max_z": z }),
        );
    }

    // free spreading of the unit packet at the origin
    let unit = MEPacketParams::new(0.0, 0.0, 1.0, 1.0, cfg.hbar, cfg.v)?;
    let free = QuadraticPotential::free(1.0)?;
    let spread_times = time_grid(2.0, 5);
    let cf = closed_form_trajectory(&unit, &free, &spread_times)?;
    let mc = mc_classical_oracle(&unit, &Flow::Quadratic(free), &spread_times, cfg.samples, ctx.seed().wrapping_add(2))?;
    cf.write_csv(files.add(ctx, "free_spreading.csv"))?;
    mc.write_csv(files.add(ctx, "free_spreading_mc.csv"))?;
    let last = spread_times.len() - 1;
    let dq2 = cf.dq[last];
    let mc_dev = (mc.trajectory.dq[last] - 5f64.sqrt()).abs() / mc.se.dq[last];
    results.insert("free_spreading".into(), json!({ "dq_t2": dq2, "mc_dq_t2": mc.trajectory.dq[last], "mc_se": mc.se.dq[last] }));

    let criteria = vec![
        CriterionResult::new(1, "quantum and classical ME packets evolve identically", match_checks),
        CriterionResult::new(
            2,
            "free spreading ΔQ(2) = √5",
            vec![
                Check::near("closed-form ΔQ(2)", dq2, 5f64.sqrt(), cfg.spread_tol),
                Check::below("MC |ΔQ(2) − √5| / se", mc_dev, cfg.z_max),
            ],
        ),
    ];
    Ok(Summary::new("mepacket-evolve", ctx.seed, criteria, files.0, results.into()))
}
