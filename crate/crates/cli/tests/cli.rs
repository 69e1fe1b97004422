use std::path::Path;
use std::process::{Command, Output};

fn loopforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopforge")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn counts_covers() {
    let o = loopforge(&["fkt", "--width", "4", "--height", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["covers"], "36");
    let o = loopforge(&["enumerate", "--graph", "torus:4x1"]);
    assert_eq!(stdout_json(&o)["covers"], "272");
}

#[test]
fn invalid_arguments_exit_with_two() {
    assert_eq!(loopforge(&["enumerate", "--graph", "nonsense"]).status.code(), Some(2));
    assert_eq!(loopforge(&["fkt", "--width", "x"]).status.code(), Some(2));
    assert_eq!(loopforge(&["sample", "--graph", "C4", "--rho", "-1"]).status.code(), Some(2));
    assert_eq!(loopforge(&["zpath", "--graph", "K2", "--weight", "bogus"]).status.code(), Some(2));
}

#[test]
fn failed_verification_exits_with_one_and_reports() {
    let o = loopforge(&["verify-all", "--only", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let report = stdout_json(&o);
    assert_eq!(report["command"], "verify-all");
    assert_eq!(report["failures"][0]["id"], 4);
}

#[test]
fn passing_verifications_exit_with_zero() {
    assert!(loopforge(&["verify-all", "--only", "1,10"]).status.success());
    assert!(loopforge(&["spin-verify", "--graph", "K2", "--beta", "0.5"]).status.success());
    assert!(loopforge(&["fourier-check", "--L", "8,16", "--random", "200", "--seed", "3"]).status.success());
}

#[test]
fn sample_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chain.json");
    std::fs::write(&cfg, r#"{"rho": 2.0, "sweeps": 4000, "burn_in": 500}"#).unwrap();
    let run = |out: &Path| {
        let o = loopforge(&[
            "sample", "--graph", "C4", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout_json(&o)
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = run(&a);
    assert_eq!(first, run(&b));
    assert_eq!(first["rho"], 2.0);
    for f in ["manifest.json", "results.csv", "stats.json", "table.json"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["params"]["chain"]["sweeps"], 4000);
}

#[test]
fn decay_scan_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let o = loopforge(&["decay-scan", "--L", "4,8", "--sweeps", "3000", "--burn-in", "500", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["rows"].as_array().unwrap().len(), 2);
    let svg = dir.path().join("again.svg");
    let o = loopforge(&["plot", "--input", out.join("decay.csv").to_str().unwrap(), "--output", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&svg).unwrap(), std::fs::read_to_string(out.join("decay.svg")).unwrap());
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_loopforge"))
        .args(["enumerate", "--graph", "C4"])
        .env("LOOPFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_loopforge"))
        .args(["enumerate", "--graph", "C4"])
        .env("LOOPFORGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
