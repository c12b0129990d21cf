use std::path::PathBuf;
use std::process::{Command, Output};

fn cqss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqss"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_full_release_demo() {
    let o = cqss(&["run", "scenarios/full-release-demo.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mean = report["aggregate"]["mean_fidelity"].as_f64().unwrap();
    assert!(mean >= 1.0 - 1e-10);
    assert_eq!(report["aggregate"]["detections"], 0);
    assert_eq!(report["trials"].as_array().unwrap().len(), 100);
}

#[test]
fn resources_table_for_three_qubits() {
    let o = cqss(&["resources", "scenarios/single-withheld.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for line in ["epr_player=3", "epr_controller=6", "dealer_measurements=6", "matches=true"] {
        assert!(out.lines().any(|l| l == line), "missing {line} in\n{out}");
    }
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = cqss(&["run", "scenarios/does-not-exist.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not found"), "{}", stderr(&o));
    assert!(stderr(&o).contains("does-not-exist.toml"));
}

#[test]
fn malformed_scenarios_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(workspace_root().join("scenarios/full-release-demo.toml")).unwrap();
    let cases = [
        (good.replace("trials = 100", "trials = 0"), "`trials`"),
        (good.replace("decoys = 2", "decoys = 40"), "`decoys`"),
        (good.replace("players = 3", "players = 5"), "`players`"),
        (good.replace("threshold = 3", "threshold = 9"), "`policy.threshold`"),
        (good.replace("master_seed", "master_sed"), "master_sed"),
        ("not toml at all [".to_string(), "malformed scenario"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&path, text).unwrap();
        let o = cqss(&["run", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(stderr(&o).contains(needle), "case {i}: {}", stderr(&o));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cqss(&[]).status.code(), Some(2));
    assert_eq!(cqss(&["frobnicate", "x.toml"]).status.code(), Some(2));
    assert_eq!(cqss(&["run"]).status.code(), Some(2));
    assert_eq!(cqss(&["run", "scenarios/eve-curve.toml", "--seed", "abc"]).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(workspace_root().join("scenarios/single-withheld.toml"))
        .unwrap()
        .replace("outcome = \"sealed\"", "outcome = \"recovered\"");
    let path = dir.path().join("wrong.toml");
    std::fs::write(&path, text).unwrap();
    let o = cqss(&["run", path.to_str().unwrap(), "-vv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL expected-outcome"), "{}", stderr(&o));

    let o = cqss(&["mstar", "scenarios/veto-controller.toml"]);
    assert_eq!(o.status.code(), Some(2), "not one share per controller");
}

#[test]
fn every_bundled_scenario_honours_the_exit_contract() {
    for name in ["full-release-demo", "single-withheld", "veto-controller", "split-share", "eve-curve"] {
        let path = format!("scenarios/{name}.toml");
        let o = cqss(&["run", &path]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let o = cqss(&["noinfo", &path]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let o = cqss(&["resources", &path]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
    for name in ["full-release-demo", "single-withheld"] {
        let o = cqss(&["mstar", &format!("scenarios/{name}.toml")]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
    let o = cqss(&["eve", "scenarios/eve-curve.toml", "-v"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn identical_flags_give_identical_output() {
    let a = cqss(&["run", "scenarios/split-share.toml", "--seed", "99"]);
    let b = cqss(&["run", "scenarios/split-share.toml", "--seed", "99"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = cqss(&["run", "scenarios/split-share.toml"]);
    assert_ne!(a.stdout, c.stdout);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let d = cqss(&["run", "scenarios/split-share.toml", "--seed", "99", "--out", out.to_str().unwrap()]);
    assert_eq!(d.status.code(), Some(0));
    assert!(d.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}
