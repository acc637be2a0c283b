use super::Files;
use crate::config::BclConfig;
use crate::report::{write_json, Check, CriterionResult, Summary};
use crate::{CliError, Context};
use mep_qlab::hilbert::random;
use mep_qlab::io::write_csv;
use mep_qlab::measurement::{
    build_unitary, premeasure, premeasure_with, probability_reproducibility, random_spec, repeatability_check, BCLSpec,
    Completion, StateTransformer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Two or three eigenvalues of multiplicity one or two, and one or two
/// spare apparatus levels beyond the pointers.
fn sized_spec(rng: &mut ChaCha8Rng, von_neumann: bool) -> Result<BCLSpec, CliError> {
    let n = rng.random_range(2..=3);
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=2)).collect();
    let extra = rng.random_range(1..=2);
    Ok(random_spec(rng, &sizes, n + extra, von_neumann)?)
}

pub fn run(cfg: &BclConfig, ctx: &Context<'_>) -> Result<Summary, CliError> {
    let mut files = Files::default();
    let seed = ctx.seed();

    // single-instance report
    let mut r = rng(seed, 0);
    let spec = match &cfg.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", path.display())))?;
            BCLSpec::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => sized_spec(&mut r, false)?,
    };
    let phi = random::ket(&mut r, spec.system_space());
    let res = premeasure(&spec, &phi)?;
    let rep = repeatability_check(&StateTransformer::new(&spec), cfg.trials, seed)?;
    let report = json!({
        "values": spec.values(),
        "p": res.p,
        "defect": res.defect,
        "coherence": res.coherence,
        "objectified": res.objectified,
        "von_neumann": spec.is_von_neumann(cfg.tol),
        "repeatable": rep.repeatable,
        "kraus_violation": rep.kraus_violation,
        "repeat_violation": rep.repeat_violation,
    });
    write_json(&files.add(ctx, "report.json"), &report)?;
    std::fs::write(files.add(ctx, "spec.json"), spec.to_json()?)
        .map_err(|e| CliError::Output(e.to_string()))?;

    // randomized sweep
    let mut rows = Vec::with_capacity(cfg.trials);
    let (mut repro_max, mut completion_max, mut vn_max) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut generic_fail = 0usize;
    for i in 0..cfg.trials {
        let mut r = rng(seed, 1 + i as u64);
        let spec = sized_spec(&mut r, false)?;
        let t = random::state(&mut r, spec.system_space());
        let repro = probability_reproducibility(&spec, &build_unitary(&spec, Completion::Canonical), &t)?;

        let phi = random::ket(&mut r, spec.system_space());
        let base = premeasure(&spec, &phi)?;
        let mut completion = 0.0_f64;
        for _ in 0..cfg.completions {
            let u = build_unitary(&spec, Completion::Random(r.random()));
            completion = completion.max(base.max_deviation(&premeasure_with(&spec, &u, &phi)?));
        }

        let generic = repeatability_check(&StateTransformer::new(&spec), 10, i as u64)?;
        let vn_spec = sized_spec(&mut r, true)?;
        let vn = repeatability_check(&StateTransformer::new(&vn_spec), 10, i as u64)?;

        repro_max = repro_max.max(repro);
        completion_max = completion_max.max(completion);
        vn_max = vn_max.max(vn.kraus_violation).max(vn.repeat_violation);
        if !generic.repeatable && generic.kraus_violation > cfg.generic_violation {
            generic_fail += 1;
        }
        rows.push(vec![
            i as f64,
            repro,
            completion,
            vn.kraus_violation,
            vn.repeat_violation,
            generic.kraus_violation,
        ]);
    }
    write_csv(
        files.add(ctx, "sweep.csv"),
        &["trial", "reproducibility", "completion_dev", "vn_kraus_violation", "vn_repeat_violation", "generic_kraus_violation"],
        &rows,
    )?;

    let fraction = if cfg.trials == 0 { 0.0 } else { generic_fail as f64 / cfg.trials as f64 };
    let checks = vec![
        Check::below("max probability reproducibility error", repro_max, cfg.tol),
        Check::below("max von Neumann repeatability violation", vn_max, cfg.tol),
        Check::at_least(
            &format!("fraction of generic specs with violation > {}", cfg.generic_violation),
            fraction,
            cfg.generic_min_fraction,
        ),
        Check::below("max completion dependence", completion_max, cfg.tol),
    ];
    let results = json!({
        "trials": cfg.trials,
        "reproducibility_max": repro_max,
        "completion_max": completion_max,
        "von_neumann_violation_max": vn_max,
        "generic_failures": generic_fail,
    });
    Ok(Summary::new("bcl-report", ctx.seed, vec![CriterionResult::new(5, "BCL premeasurement suite", checks)], files.0, results))
}
