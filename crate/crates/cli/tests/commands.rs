use std::path::PathBuf;
use std::process::{Command, Output};

fn cochain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cochain"))
        .args(args)
        .env_remove("COCHAIN_SEED")
        .output()
        .expect("run cochain")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cochain-commands-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn poincare_writes_a_potential_whose_hessian_is_the_input() {
    let dir = scratch("hessian");
    let input = dir.join("t.json");
    let output = dir.join("a.json");
    std::fs::write(
        &input,
        r#"{"dim": 2, "rank": 2, "space": "K", "grade": 1, "entries": [
            {"index": [0, 0], "expr": "(* 2 x1)"},
            {"index": [0, 1], "expr": "(* 2 x0)"},
            {"index": [1, 0], "expr": "(* 2 x0)"}]}"#,
    )
    .unwrap();
    let out = cochain(&[
        "poincare",
        "--in",
        input.to_str().unwrap(),
        "--out",
        output.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc["grade"], 0);
    assert_eq!(doc["entries"][0]["expr"], "(* (^ x0 2) x1)");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unknown_entry_fields_are_rejected() {
    let dir = scratch("unknown");
    let input = dir.join("t.json");
    std::fs::write(
        &input,
        r#"{"dim": 2, "rank": 0, "entries": [], "colour": 1}"#,
    )
    .unwrap();
    let out = cochain(&[
        "poincare",
        "--in",
        input.to_str().unwrap(),
        "--out",
        dir.join("a.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn kernel_reports_the_affine_basis_as_json() {
    let out = cochain(&["--format", "json", "kernel", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["basis"].as_array().unwrap().len(), 4);
    assert_eq!(doc["report"]["overall"], "pass");
}

#[test]
fn json_reports_carry_the_failing_witness() {
    let out = cochain(&[
        "--format",
        "json",
        "check-complex",
        "--dim",
        "3",
        "--grade",
        "1",
        "--trials",
        "4",
        "--inject-fault",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["overall"], "fail");
    let failing: Vec<_> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert!(!failing.is_empty());
    assert_eq!(failing[0]["witness"]["trial"], 0);
}

#[test]
fn out_of_range_arguments_exit_with_input_error() {
    assert_eq!(
        cochain(&["check-complex", "--dim", "9", "--grade", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cochain(&["spacetime", "verify", "--metric", "kerr"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cochain(&["spacetime", "verify", "--H", "(+ 1"])
            .status
            .code(),
        Some(2)
    );
}
