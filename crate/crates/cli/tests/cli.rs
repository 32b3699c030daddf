//! End-to-end tests for the `nfk` binary: exit codes, output determinism,
//! and round-trips where one subcommand's output feeds another.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn nfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfk"))
        .args(args)
        .output()
        .expect("spawn nfk")
}

fn nfk_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nfk"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn nfk");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().expect("wait nfk")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn first_line(out: &Output) -> String {
    stdout(out).lines().next().unwrap_or_default().to_string()
}

#[test]
fn parse_reports_analysis_and_exits_zero() {
    // blank lines and comments are skipped
    let out = nfk_stdin(&["parse", "-"], "\n# only a comment\n");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());

    let out = nfk_stdin(&["parse", "-"], "forall x0. ([]x0 -> x0)\n");
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&first_line(&out)).unwrap();
    assert_eq!(v["kind"], "parse");
    assert_eq!(v["qrank"], 1);
    assert_eq!(v["fragment"], "full");
}

#[test]
fn bad_syntax_exits_two_with_error_on_stderr() {
    let out = nfk_stdin(&["parse", "-"], "forall x0 x0\n");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "stderr was: {err}");
}

#[test]
fn generate_then_check_round_trips() {
    let out = nfk(&["generate", "rigidity", "x0 | x1", "~x2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let deriv = first_line(&out);

    let check = nfk_stdin(&["check", "-"], &deriv);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
    let v: serde_json::Value = serde_json::from_str(&first_line(&check)).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn check_rejects_a_corrupted_derivation() {
    let out = nfk(&["generate", "rigidity", "x0", "x1"]);
    let mut v: serde_json::Value = serde_json::from_str(&first_line(&out)).unwrap();
    // break the final line's formula
    let lines = v["derivation"]["lines"].as_array_mut().unwrap();
    let last = lines.len() - 1;
    lines[last]["formula"] = serde_json::json!("x9");
    let check = nfk_stdin(&["check", "-"], &v.to_string());
    assert_eq!(check.status.code(), Some(1), "{}", stdout(&check));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "model",
        "enumerate",
        "--nmax",
        "3",
        "--nec2",
        "--dedupe",
        "--seed",
        "7",
    ];
    let a = nfk(&args);
    let b = nfk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn enumerate_then_validate_each_model() {
    let out = nfk(&["model", "enumerate", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let mut saw_model = false;
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["kind"] != "model" {
            continue;
        }
        saw_model = true;
        let check = nfk_stdin(&["model", "validate", "-"], line);
        assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
    }
    assert!(saw_model);
}

#[test]
fn collapse_exit_code_tracks_the_verdict() {
    // the two-element model is classical: everything collapses
    let out = nfk(&["model", "enumerate", "--nmax", "2"]);
    let model = stdout(&out)
        .lines()
        .find(|l| l.contains("\"kind\":\"model\""))
        .unwrap()
        .to_string();
    let c = nfk_stdin(&["model", "collapse", "-"], &model);
    assert_eq!(c.status.code(), Some(0));

    // a deduped run at n = 4 with a wide necessity set contains a non-collapsing model
    let out = nfk(&["model", "enumerate", "--nmax", "4", "--nec2", "--dedupe"]);
    let found = stdout(&out).lines().any(|l| {
        if !l.contains("\"kind\":\"model\"") {
            return false;
        }
        let c = nfk_stdin(&["model", "collapse", "-"], l);
        c.status.code() == Some(1)
    });
    assert!(found, "expected a countermodel to the collapse axiom");
}

#[test]
fn kripke_probe_separates_s3_from_s4() {
    let out = nfk(&["kripke", "conserve", "[]x0 -> [][]x0", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&first_line(&out)).unwrap();
    assert!(!v["countermodel"].is_null(), "{v}");

    let out = nfk(&[
        "kripke", "conserve", "[]x0 -> [][]x0", "--system", "4", "--nmax", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&first_line(&out)).unwrap();
    assert!(v["countermodel"].is_null(), "{v}");
}

#[test]
fn to_model_then_agree_finds_no_discrepancy() {
    let out = nfk(&["kripke", "conserve", "[]x0 -> [][]x0", "--nmax", "2"]);
    let v: serde_json::Value = serde_json::from_str(&first_line(&out)).unwrap();
    let cm = &v["countermodel"];
    let frame = serde_json::json!({"kind": "frame", "frame": cm["frame"]}).to_string();
    let val = cm["valuation"].to_string();
    std::fs::write("/tmp/nfk_cli_test_val.json", &val).unwrap();

    let pair = nfk_stdin(
        &[
            "kripke",
            "to-model",
            "-",
            "--world",
            "w0",
            "/tmp/nfk_cli_test_val.json",
        ],
        &frame,
    );
    assert_eq!(pair.status.code(), Some(0), "{}", stdout(&pair));

    let agree = nfk_stdin(
        &["kripke", "agree", "-", "--samples", "60", "--depth", "3"],
        &first_line(&pair),
    );
    assert_eq!(agree.status.code(), Some(0), "{}", stdout(&agree));
    let v: serde_json::Value = serde_json::from_str(&first_line(&agree)).unwrap();
    assert_eq!(v["discrepancies"].as_array().unwrap().len(), 0);
}

#[test]
fn prealg_sci_round_trip_preserves_the_tables() {
    let p = serde_json::json!({
        "n": 2, "bot": 0, "top": 1,
        "neg": [1, 0],
        "or": [[0, 1], [1, 1]],
        "and": [[0, 0], [0, 1]],
        "imp": [[1, 1], [0, 1]],
        "leq": [[1, 1], [0, 1]],
    })
    .to_string();
    let sci = nfk_stdin(&["prealg", "to-sci", "-", "--ultra", "0"], &p);
    assert_eq!(sci.status.code(), Some(0), "{}", stdout(&sci));
    let back = nfk_stdin(&["prealg", "from-sci", "-"], &first_line(&sci));
    assert_eq!(back.status.code(), Some(0), "{}", stdout(&back));
    let v: serde_json::Value = serde_json::from_str(&first_line(&back)).unwrap();
    let orig: serde_json::Value = serde_json::from_str(&p).unwrap();
    assert_eq!(v["prealgebra"], orig);
}

#[test]
fn budget_env_var_aborts_long_searches() {
    let out = Command::new(env!("CARGO_BIN_EXE_nfk"))
        .args(["model", "enumerate", "--nmax", "4"])
        .env("NFK_BUDGET_MS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("NFK_BUDGET_MS"), "stderr was: {err}");
}
