use std::path::Path;
use std::process::Command;

fn hidec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hidec"))
}

fn scenarios() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn parse_ltl_prints_ast_and_automaton() {
    let out = hidec()
        .args(["parse-ltl", "([]<> a) && (<> b)", "--automaton"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Always"));
    assert!(text.contains("initial"));
}

#[test]
fn parse_ltl_syntax_error_exits_10() {
    let out = hidec().args(["parse-ltl", "a U"]).output().unwrap();
    assert_eq!(out.status.code(), Some(10));
}

#[test]
fn missing_scenario_exits_3() {
    let out = hidec().args(["plan", "/no/such/file.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn toy_simulate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = hidec()
        .arg("simulate")
        .arg(scenarios().join("toy.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(dir.path().join("trajectory.svg").exists());
}

#[test]
fn reach_reports_a_box() {
    let out = hidec()
        .arg("reach")
        .arg(scenarios().join("toy.toml"))
        .args(["--box", "0:1", "--input", "1.0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[1, 2]"), "{text}");
}
