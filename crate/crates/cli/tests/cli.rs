use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn run(experiment: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.with_extension("toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mep-qlab"))
        .arg(experiment)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn hashes(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let digest = Sha256::digest(std::fs::read(&p).unwrap());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            (p.file_name().unwrap().to_string_lossy().into_owned(), hex)
        })
        .collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn entanglement_demo_reports_anticorrelation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ent");
    let o = run("entanglement-demo", "", &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!((s["results"]["correlation"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    let p: Vec<f64> = s["results"]["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (got, want) in p.iter().zip([0.0, 0.5, 0.5, 0.0]) {
        assert!((got - want).abs() < 1e-15);
    }
    assert_eq!(s["criteria"][0]["id"], 4);
}

#[test]
fn default_evolve_run_has_root_five_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("evolve");
    let o = run("mepacket-evolve", "", &out, &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(out.join("free_spreading.csv")).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let last = rd.records().last().unwrap().unwrap();
    assert_eq!(last[0].parse::<f64>().unwrap(), 2.0);
    assert!((last[3].parse::<f64>().unwrap() - 5f64.sqrt()).abs() < 1e-12);
    let ids: Vec<u64> = summary(&out)["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2]);
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("mepacket-evolve", "[mepacket-evolve]\nsamples = 2000\nn_times = 5\n"),
        ("bcl-report", "[bcl-report]\ntrials = 10\ncompletions = 2\n"),
        ("trigger-report", "[trigger-report]\nmodels = 6\nprop23_trials = 10\n"),
    ];
    for (exp, cfg) in cases {
        let a = tmp.path().join(format!("{exp}-a"));
        let b = tmp.path().join(format!("{exp}-b"));
        let c = tmp.path().join(format!("{exp}-c"));
        for dir in [&a, &b] {
            let o = run(exp, cfg, dir, &["--seed", "99"]);
            assert!(matches!(o.status.code(), Some(0 | 1)), "{exp}: {}", String::from_utf8_lossy(&o.stderr));
        }
        run(exp, cfg, &c, &["--seed", "100"]);
        let (ha, hb, hc) = (hashes(&a), hashes(&b), hashes(&c));
        assert!(ha.len() > 1);
        assert_eq!(ha, hb, "{exp}");
        assert_ne!(ha, hc, "{exp}: a different seed should change the output");
    }
}

#[test]
fn seed_from_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cfg = "[run]\nseed = 5\n\n[bcl-report]\ntrials = 5\n";
    run("bcl-report", cfg, &a, &[]);
    run("bcl-report", "[bcl-report]\ntrials = 5\n", &b, &["--seed", "5"]);
    assert_eq!(hashes(&a), hashes(&b));
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("chain-scaling", "[chain-scaling]\nlamda = 2.0\n", &tmp.path().join("x"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lamda") && err.contains("line 2"), "{err}");

    let o = run("bcl-report", "", &tmp.path().join("y"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let o = run("entanglement-demo", "[entanglement-demo]\ntol = \"small\"\n", &tmp.path().join("z"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_three_and_name_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("jointqp-convergence", "[jointqp-convergence]\nn = 64\ndx = 0.5\nsigma = 0.05\n", &tmp.path().join("j"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid-resolution"));
}

#[test]
fn failed_assertion_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = run("chain-scaling", "[chain-scaling]\nslope_tol = 1e-9\n", &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let s = summary(&out);
    assert_eq!(s["pass"], false);
    assert_eq!(s["criteria"][0]["id"], 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL criterion 3"));
}
