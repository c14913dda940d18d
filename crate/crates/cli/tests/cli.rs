use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gdatool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdatool"))
        .args(args)
        .env_remove("GDA_DIM_CAP")
        .env_remove("GDA_EVAL_CAP")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// ring-3, m = 1, n = 2 instance in a fresh directory.
fn ring3_instance(dir: &TempDir) -> PathBuf {
    let pc = dir.path().join("pc.json");
    let vi = dir.path().join("vi.json");
    let inst = dir.path().join("inst.json");
    assert_eq!(
        code(&gdatool(&[
            "gen-pc",
            "--kind",
            "ring",
            "--size",
            "3",
            "-o",
            s(&pc)
        ])),
        0
    );
    assert_eq!(
        code(&gdatool(&[
            "gen-vi",
            "-m",
            "1",
            "--seed",
            "4",
            "-o",
            s(&vi)
        ])),
        0
    );
    let out = gdatool(&[
        "build",
        "--pc",
        s(&pc),
        "--vi",
        s(&vi),
        "--n",
        "2",
        "--epsilon",
        "1e-3",
        "--delta",
        "0.5",
        "-o",
        s(&inst),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    inst
}

#[test]
fn grad_check_passes_on_ring3() {
    let dir = TempDir::new().unwrap();
    let inst = ring3_instance(&dir);
    let out = gdatool(&["grad-check", "--instance", s(&inst), "--points", "100"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["points"], 100);
    assert_eq!(report["dual_ok"], true);
}

#[test]
fn grad_check_mismatch_exit_code() {
    let dir = TempDir::new().unwrap();
    let pc = dir.path().join("pc.json");
    let vi = dir.path().join("vi.json");
    let inst = dir.path().join("inst.json");
    gdatool(&["gen-pc", "-o", s(&pc)]);
    gdatool(&["gen-vi", "-o", s(&vi)]);
    // n = 8 lets distances reach the gate thresholds, where f is no longer
    // quadratic and a coarse difference step misses the curvature
    let out = gdatool(&[
        "build",
        "--pc",
        s(&pc),
        "--vi",
        s(&vi),
        "--n",
        "8",
        "--epsilon",
        "1e-3",
        "--delta",
        "0.25",
        "-o",
        s(&inst),
    ]);
    assert_eq!(code(&out), 0);
    let out = gdatool(&[
        "grad-check",
        "--instance",
        s(&inst),
        "--points",
        "50",
        "--h",
        "0.3",
    ]);
    assert_eq!(code(&out), 5);
}

#[test]
fn paper_build_refuses_and_prints_exact_values() {
    let out = gdatool(&[
        "build", "--paper", "--m", "2", "--kappa", "3", "--rho", "1/2",
    ]);
    assert_eq!(code(&out), 4);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // 2^64 * 2^14 * 9 * 2^8
    assert_eq!(v["paper"]["n"], "696341272098026404630757376");
    assert_eq!(v["paper"]["delta"], "1/16384");
    assert_eq!(v["premises"]["eps_le_delta_over_n"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds cap"));
}

#[test]
fn solve_decode_audit_chain() {
    let dir = TempDir::new().unwrap();
    let inst = ring3_instance(&dir);
    let sol = dir.path().join("sol.json");
    let out = gdatool(&[
        "solve",
        "--instance",
        s(&inst),
        "--step",
        "0.05",
        "--restarts",
        "3",
        "--seed",
        "2",
        "-o",
        s(&sol),
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    for key in [
        "max_violation",
        "epsilon",
        "pass",
        "method",
        "iterations",
        "seed",
    ] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert_eq!(report["pass"], true);
    assert_eq!(report["method"], "extragradient");

    let out = gdatool(&["decode", "--instance", s(&inst), "--point", s(&sol)]);
    assert_eq!(code(&out), 0);
    let decoded: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(["linvi", "pc", "inconclusive"].contains(&decoded["kind"].as_str().unwrap()));

    let out = gdatool(&["audit", "--instance", s(&inst), "--point", s(&sol)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let audit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(audit["audit"]["unconditional_holds"], true);

    let out = gdatool(&["eval", "--instance", s(&inst), "--point", s(&sol)]);
    assert_eq!(code(&out), 0);
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(eval["gx"].as_array().unwrap().len(), 6);
}

#[test]
fn audit_refuses_nonstationary_point() {
    let dir = TempDir::new().unwrap();
    let inst = ring3_instance(&dir);
    let point = dir.path().join("p.json");
    std::fs::write(
        &point,
        r#"{"x": [1, 1, 1, 1, 1, 1], "y": [0, 0.2, 0.4, 0.6, 0.8, 1]}"#,
    )
    .unwrap();
    let out = gdatool(&[
        "audit",
        "--instance",
        s(&inst),
        "--point",
        s(&point),
        "--epsilon",
        "1e-9",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn pipeline_is_byte_identical() {
    let args = [
        "pipeline",
        "--seed",
        "7",
        "--no-timings",
        "-m",
        "2",
        "--n",
        "4",
        "--step",
        "0.05",
    ];
    let a = gdatool(&args);
    let b = gdatool(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = gdatool(&[
        "pipeline",
        "--seed",
        "8",
        "--no-timings",
        "-m",
        "2",
        "--n",
        "4",
        "--step",
        "0.05",
    ]);
    assert_ne!(a.stdout, other.stdout);
    let timed = gdatool(&[
        "pipeline", "--seed", "7", "-m", "2", "--n", "4", "--step", "0.05",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(v["timings"]["solve_ms"].is_f64());
}

#[test]
fn pipeline_reruns_from_its_own_config() {
    let dir = TempDir::new().unwrap();
    let first = gdatool(&["pipeline", "--seed", "3", "--no-timings", "--step", "0.05"]);
    assert_eq!(code(&first), 0);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, report["config"].to_string()).unwrap();
    let again = gdatool(&["pipeline", "--config", s(&config), "--no-timings"]);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kappa\": 3,\n \"nor\": [[1, 2]]").unwrap();
    let out = gdatool(&[
        "build",
        "--pc",
        s(&bad),
        "--vi",
        s(&bad),
        "--n",
        "1",
        "--epsilon",
        "1",
        "--delta",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(code(&gdatool(&["solve", "--no-such-flag"])), 2);
    let missing = gdatool(&[
        "eval",
        "--instance",
        "/nonexistent/i.json",
        "--point",
        "/nonexistent/p.json",
    ]);
    assert_eq!(code(&missing), 1);

    // two outputs for vertex 0
    let pc = dir.path().join("pc.json");
    std::fs::write(
        &pc,
        r#"{"kappa": 3, "nor": [[1, 2, 0]], "purify": [[0, 1, 0]]}"#,
    )
    .unwrap();
    let vi = dir.path().join("vi.json");
    assert_eq!(code(&gdatool(&["gen-vi", "-o", s(&vi)])), 0);
    let out = gdatool(&[
        "build",
        "--pc",
        s(&pc),
        "--vi",
        s(&vi),
        "--n",
        "1",
        "--epsilon",
        "1e-3",
        "--delta",
        "1",
    ]);
    assert_eq!(code(&out), 3);
    let out = gdatool(&["gen-vi", "--rho=-1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn environment_caps() {
    let dir = TempDir::new().unwrap();
    let inst = ring3_instance(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_gdatool"))
        .args([
            "solve",
            "--instance",
            s(&inst),
            "--method",
            "grid",
            "--grid-step",
            "0.5",
        ])
        .env("GDA_EVAL_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    let out = Command::new(env!("CARGO_BIN_EXE_gdatool"))
        .args(["pipeline", "--n", "50"])
        .env("GDA_DIM_CAP", "20")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
}

#[test]
fn help_documents_exit_codes() {
    let out = gdatool(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for word in [
        "pipeline",
        "grad-check",
        "GDA_DIM_CAP",
        "GDA_EVAL_CAP",
        "audit assertion failure",
    ] {
        assert!(text.contains(word), "{word}");
    }
}
