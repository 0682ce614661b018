use std::path::Path;
use std::process::{Command, Output};

fn traction_gap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traction-gap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn demo_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = traction_gap(&["demo", "gap", "--formats", "json,csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gap.json").exists());
    assert!(dir.path().join("gap.csv").exists());
    assert!(!dir.path().join("gap.svg").exists());
}

#[test]
fn unknown_demo_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(traction_gap(&["demo", "nope"], dir.path()).status.code(), Some(3));
}

#[test]
fn bad_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["demo = tension\nmaterial.nu = 0.3\n", "name = x\n", "demo = tension\nh_list = 0.1, 0.5\n"] {
        let cfg = config(dir.path(), text);
        let out = traction_gap(&["run", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(3), "{text}");
    }
}

#[test]
fn impossible_tolerance_is_an_assertion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "demo = tension\nname = strict\nh_list = 0.1\ntol.sweep_final = 1e-12\n");
    let out = traction_gap(&["run", &cfg, "--formats", "json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("final_relative_gap"));
    assert!(dir.path().join("strict.json").exists());
}

#[test]
fn check_loads_reports_compression() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "demo = compression\nname = squeeze\n");
    let out = traction_gap(&["check-loads", &cfg, "--formats", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("squeeze.json")).unwrap()).unwrap();
    assert!(json["verdicts"].to_string().contains("violated"), "{}", json["verdicts"]);
}
