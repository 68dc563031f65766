//! The `ceflow` binary: verbs, output files, structured errors.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ceflow"))
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

#[test]
fn run_writes_report_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", &scenario("osgood_1d.json"), "--out"])
        .arg(dir.path())
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report_k2.csv")).unwrap();
    assert!(report.starts_with("t,D,term1,term2,term3,bound,W_refine,mass\n"));
    assert_eq!(report.lines().count(), 12);
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan_k2.json")).unwrap()).unwrap();
    for key in ["entries", "potentials", "primal", "dual"] {
        assert!(plan.get(key).is_some(), "{key}");
    }
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rho0.json")).unwrap()).unwrap();
    assert_eq!(m["dimension"], 1);
    let traj = std::fs::read_to_string(dir.path().join("trajectory_0.csv")).unwrap();
    assert!(traj.starts_with("t,x_1,step,err\n"));
}

#[test]
fn run_is_byte_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (d, threads) in dirs.iter().zip(["1", "4"]) {
        let st = bin()
            .args(["run", &scenario("planar_osgood.json"), "--format", "json", "--threads", threads, "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert!(st.status.success());
    }
    for f in ["report_k2.json", "plan_k2.json", "rhoT.json", "summary.json"] {
        assert_eq!(std::fs::read(dirs[0].path().join(f)).unwrap(), std::fs::read(dirs[1].path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn converge_prints_table() {
    let out = bin().args(["converge", &scenario("linear_expansion.json"), "--ladder", "4"]).output().unwrap();
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("rung,resolution,atoms,rel_tol,W,ratio\n"));
    assert!(s.trim_end().ends_with("PASS"));
}

#[test]
fn non_osgood_ladder_only_warns() {
    let out = bin().args(["converge", &scenario("planar_non_osgood.json"), "--ladder", "3"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("warning: "));
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn errors_are_structured() {
    let out = bin().args(["run", "/does/not/exist.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(rec["error"], "config");
    let out = bin().args(["converge", &scenario("zero_field.json"), "--ladder", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_override_changes_random_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("random.json");
    std::fs::write(
        &cfg,
        r#"{"name": "r", "field": {"key": "rotation"},
            "initial": {"kind": "density", "density": {"name": "gaussian", "mean": [0.0, 0.0], "std": 0.3},
                        "resolution": 5, "sampling": "random"},
            "horizon": 0.5, "grid": 3, "diagnostics": {"alpha": 0.2}, "seed": 1}"#,
    )
    .unwrap();
    let read = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        assert!(bin().args(["run"]).arg(&cfg).args(["--seed", seed, "--out"]).arg(&d).output().unwrap().status.success());
        std::fs::read(d.join("rho0.json")).unwrap()
    };
    assert_eq!(read("5", "a"), read("5", "b"));
    assert_ne!(read("5", "c"), read("6", "d"));
}
