use super::Files;
use crate::config::TriggerConfig;
use crate::report::{Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::hilbert::{random, Symmetry};
use mep_qlab::io::write_csv;
use mep_qlab::measurement::{prop22_max, prop23_check, random_model, trigger_states};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn epsilon(s: Symmetry) -> f64 {
    match s {
        Symmetry::Symmetric => 1.0,
        Symmetry::Antisymmetric => -1.0,
    }
}

/// Block layouts for the commuting-observable comparison.
const PROP23_LAYOUTS: [(&[usize], Symmetry); 4] = [
    (&[2, 2], Symmetry::Antisymmetric),
    (&[3, 3], Symmetry::Symmetric),
    (&[1, 1, 1], Symmetry::Symmetric),
    (&[2, 1, 1], Symmetry::Symmetric),
];

pub fn run(cfg: &TriggerConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    if cfg.max_dim < 4 {
        return Err(CliError::Config(format!("trigger-report: max_dim must be at least 4, got {}", cfg.max_dim)));
    }
    let mut files = Files::default();
    let seed = ctx.seed();

    let mut rows22 = Vec::with_capacity(cfg.models);
    let mut max22 = 0.0_f64;
    for i in 0..cfg.models {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let symmetry = if i % 2 == 0 { Symmetry::Symmetric } else { Symmetry::Antisymmetric };
        let n = rng.random_range(2..=3);
        let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=(cfg.max_dim / n).max(2))).collect();
        let model = random_model(&mut rng, &sizes, 1, symmetry, 2)?;
        let phi = random::ket(&mut rng, model.source_space());
        let m = prop22_max(&model, &phi)?;
        max22 = max22.max(m);
        rows22.push(vec![i as f64, epsilon(symmetry), n as f64, model.d() as f64, m]);
    }
    write_csv(files.add(ctx, "prop22.csv"), &["model", "epsilon", "detectors", "d", "max_trace_w"], &rows22)?;

    let mut rows23 = Vec::new();
    let mut control_rows = Vec::new();
    let (mut max23, mut min_fraction) = (0.0_f64, 1.0_f64);
    for (i, (sizes, symmetry)) in PROP23_LAYOUTS.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((cfg.models + i) as u64);
        let model = random_model(&mut rng, sizes, 1, symmetry, 1)?;
        let phi = random::ket(&mut rng, model.source_space());
        let st = trigger_states(&model, &phi)?;
        let rep = prop23_check(&st, cfg.prop23_trials, rng.random())?;
        let fraction = rep.control_fraction_above(cfg.control_threshold);
        max23 = max23.max(rep.commuting_max);
        min_fraction = min_fraction.min(fraction);
        rows23.push(vec![i as f64, epsilon(symmetry), sizes.len() as f64, rep.commuting_max, fraction]);
        control_rows.extend(rep.control.iter().enumerate().map(|(t, &c)| vec![i as f64, t as f64, c]));
    }
    write_csv(
        files.add(ctx, "prop23.csv"),
        &["model", "epsilon", "detectors", "commuting_max", "control_fraction"],
        &rows23,
    )?;
    write_csv(files.add(ctx, "prop23_control.csv"), &["model", "trial", "deviation"], &control_rows)?;

    let criteria = vec![
        CriterionResult::new(
            6,
            "cross-detector traces vanish",
            vec![Check::below("max |tr W_kl| over k ≠ l", max22, cfg.prop22_tol)],
        ),
        CriterionResult::new(
            7,
            "commuting observables cannot separate the trigger states",
            vec![
                Check::below("max |tr[B T_trig2] − tr[B T_trig3]|", max23, cfg.prop23_tol),
                Check::at_least(
                    &format!("min fraction of control deviations > {}", cfg.control_threshold),
                    min_fraction,
                    cfg.control_fraction,
                ),
            ],
        ),
    ];
    let results = json!({
        "prop22_models": cfg.models,
        "prop22_max": max22,
        "prop23_models": PROP23_LAYOUTS.len(),
        "prop23_max": max23,
        "control_min_fraction": min_fraction,
    });
    Ok(Summary::new("trigger-report", ctx.seed, criteria, files.0, results))
}
