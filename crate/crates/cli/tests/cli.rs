use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_gmdet")).args(args).output().expect("binary runs");
    let code = out.status.code().expect("exit code");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (code, json)
}

fn check(name: &str) -> (i32, serde_json::Value) {
    run(&["check", data(name).to_str().unwrap()])
}

#[test]
fn rank_one_check_verifies() {
    let (code, rep) = check("kummer_exp.json");
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["outcome"], "verified");
    assert_eq!(rep["schema_version"], 1);
}

#[test]
fn triangular_matrix_is_not_admissible() {
    let (code, rep) = check("triangular_not_admissible.json");
    assert_eq!(code, 1);
    assert!(rep["reason"].as_str().unwrap().contains("not_admissible"), "{rep}");
}

#[test]
fn empty_divisor_is_an_input_error() {
    let (code, rep) = check("empty_divisor.json");
    assert_eq!(code, 1);
    assert!(rep["reason"].as_str().unwrap().contains("empty_divisor"));
}

#[test]
fn missing_file_is_an_input_error() {
    let (code, rep) = run(&["check", "/nonexistent/spec.json"]);
    assert_eq!(code, 1);
    assert_eq!(rep["outcome"], "input_error");
}

#[test]
fn fourier_files_verify() {
    for f in ["fourier_rank1.json", "fourier_rank2_irregular.json"] {
        let (code, rep) = run(&["fourier", data(f).to_str().unwrap()]);
        assert_eq!(code, 0, "{f}: {rep}");
        assert_eq!(rep["result"]["closed_form_match"], true);
    }
}

#[test]
fn kloosterman_rejects_integer_exponents() {
    let (code, _) = run(&["kloosterman", "--alpha", "1", "--beta", "1/5"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["kloosterman", "--alpha", "1/3", "--beta", "4/3"]);
    assert_eq!(code, 1);
}

#[test]
fn kloosterman_report_file() {
    let path = std::env::temp_dir().join(format!("gmdet-kl-{}.json", std::process::id()));
    let (code, rep) = run(&["kloosterman", "--alpha", "1/3", "--beta", "1/5", "--report", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{rep}");
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, rep);
    assert!(rep.get("timings").is_none());
}

#[test]
fn periods_exit_codes() {
    let (code, rep) = run(&["periods", "--coeffs", "0,1", "--seed", "1", "--draws", "2"]);
    assert_eq!(code, 0, "{rep}");
    let (code, _) = run(&["periods", "--coeffs", "1,0", "--seed", "1"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["periods", "--coeffs", "0,1"]);
    assert_eq!(code, 1, "draws without a seed");
    let (code, _) = run(&["periods", "--coeffs", "0,1", "--tol", "1e-30", "--draws", "0"]);
    assert_eq!(code, 3, "unreachable tolerance cannot be certified");
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["kloosterman", "--alpha", "x", "--beta", "1/5"]).0, 1);
}
