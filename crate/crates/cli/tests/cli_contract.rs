mod common;

use common::{fixture, qdiff};
use qdiff::calculi::builtin;
use qdiff_cli::calcfile;

#[test]
fn reduce_examples() {
    let cases = [
        ("x d2x", "d2x x + (q - 1) dx dx"),
        ("q^2 dx", "(-1 - q) dx"),
        ("-dx", "-dx"),
        ("dx dx dx", "0"),
        ("x^2", "x^2"),
        ("(1 + q) dx - q dx", "dx"),
        ("d(d(x))", "d2x"),
        ("d(x^2)", "2 dx x"),
    ];
    for (input, want) in cases {
        let out = qdiff(&["reduce", "--calc", "line-j", input]);
        assert_eq!(out.code, 0, "{input}: {}", out.stderr);
        assert_eq!(out.stdout, format!("{want}\n"), "{input}");
    }
}

#[test]
fn jbar_uses_its_own_root() {
    let out = qdiff(&["reduce", "--calc", "line-jbar", "x d2x"]);
    assert_eq!(out.stdout, "d2x x + (q - 1) dx dx\n");
    let out = qdiff(&["reduce", "--calc", "line-jbar", "dx d2x"]);
    assert_eq!(out.stdout, "q d2x dx\n");
}

#[test]
fn d_applies_the_differential() {
    let out = qdiff(&["d", "--calc", "line-j", "--times", "3", "x^4 dx"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "0\n"));
    let out = qdiff(&["d", "--calc", "derham-line", "--times", "2", "x^3"]);
    assert_eq!(out.stdout, "0\n");
    let out = qdiff(&["d", "--calc", "line-j", "x dx"]);
    assert_eq!(out.stdout, "d2x x + q dx dx\n");
}

#[test]
fn zero_is_an_empty_json_list() {
    let out = qdiff(&["--format", "json", "reduce", "--calc", "line-j", "dx dx dx"]);
    assert!(out.stdout.contains("\"result\": []"), "{}", out.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["reduce", "--calc", "line-j", "x + + dx"],
        &["reduce", "--calc", "line-j", "x dz"],
        &["reduce", "--calc", "no-such-calculus", "x"],
        &["reduce", "--calc", "line-j"],
        &["frobnicate"],
        &["qbinom", "--N", "3", "--top", "2", "--bot", "3"],
        &["qbinom", "--N", "99", "--top", "2", "--bot", "1"],
        &["nogo", "--N", "4", "--max-N", "3"],
        &["plane-check", "--root", "k"],
        &["flip-check", "--N", "3", "--braiding", "1", "--element", "x dx"],
    ];
    for args in cases {
        let out = qdiff(args);
        assert_eq!(out.code, 2, "{args:?}: {}{}", out.stdout, out.stderr);
        assert!(!out.stderr.is_empty());
    }
    let out = qdiff(&["reduce", "--calc", "line-j", "x + + dx"]);
    assert!(out.stderr.contains("column 5"), "{}", out.stderr);
    let out = qdiff(&["reduce", "--calc", "line-j", "x dz"]);
    assert!(out.stderr.contains("`dz` at column 3"), "{}", out.stderr);
}

#[test]
fn help_exits_with_zero() {
    let out = qdiff(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("nogo"));
}

#[test]
fn corrupted_rule_set_fails_with_a_witness() {
    let path = fixture("corrupted-line.calc");
    let out = qdiff(&["check", "--calc", &path, "--samples", "40"]);
    assert_eq!(out.code, 1, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("FAIL"));
    assert!(out.stdout.contains("witness") || out.stdout.contains("residual:"), "{}", out.stdout);
    assert!(out.stdout.ends_with("result: FAIL\n"));

    let out = qdiff(&["--format", "json", "check", "--calc", &path, "--samples", "40"]);
    assert_eq!(out.code, 1);
    let doc: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["passed"], false);
    let failing: Vec<_> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|c| c["witness"].is_object()));
}

#[test]
fn shipped_fixture_matches_the_builtin() {
    let path = fixture("line-j.calc");
    let from_file = calcfile::load(&path).unwrap();
    let shipped = builtin("line-j").unwrap().unwrap();
    assert_eq!(from_file.rules().rules(), shipped.rules().rules());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), calcfile::export(&shipped));
    let out = qdiff(&["check", "--calc", &path, "--samples", "40"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
}

#[test]
fn seeded_checks_on_shipped_calculi_exit_zero() {
    for name in qdiff::calculi::BUILTIN_NAMES {
        let out = qdiff(&["--seed", "3", "check", "--calc", name, "--samples", "40"]);
        assert_eq!(out.code, 0, "{name}: {}", out.stdout);
    }
}

#[test]
fn property_commands_exit_zero() {
    for args in [
        &["nogo", "--N", "2", "--max-N", "4"][..],
        &["flip-check", "--N", "4", "--braiding", "3", "--samples", "30"],
        &["flip-check", "--N", "3", "--braiding", "1", "--samples", "5", "--element", "x dx ox -d2y"],
        &["plane-check", "--root", "j"],
        &["plane-check", "--root", "jbar"],
        &["plane-check", "--root", "classical"],
        &["derive-line", "--root", "j"],
        &["qbinom", "--N", "6", "--top", "6", "--bot", "3", "--root", "5"],
    ] {
        let out = qdiff(args);
        assert_eq!(out.code, 0, "{args:?}: {}{}", out.stdout, out.stderr);
    }
}

#[test]
fn nogo_json_has_the_documented_shape() {
    let out = qdiff(&["nogo", "--N", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "nogo");
    assert_eq!(doc["N"], 3);
    assert_eq!(doc["solutions"], serde_json::json!([]));
    assert!(!doc["notes"].as_array().unwrap().is_empty());
    let cert = doc["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["triple"] == serde_json::json!([1, 1, 1]))
        .unwrap();
    assert_eq!(cert["profile"], serde_json::json!([0, 0, 1, 0]));

    let out = qdiff(&["nogo", "--N", "2", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["solutions"], serde_json::json!([[1, 1, 1]]));
}

#[test]
fn the_binary_honours_the_exit_code_contract() {
    let bin = env!("CARGO_BIN_EXE_qdiff");
    let run = |args: &[&str]| std::process::Command::new(bin).args(args).output().unwrap();
    let ok = run(&["reduce", "--calc", "line-j", "x d2x"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "d2x x + (q - 1) dx dx\n");
    let bad = run(&["check", "--calc", &fixture("corrupted-line.calc"), "--samples", "20"]);
    assert_eq!(bad.status.code(), Some(1));
    let usage = run(&["reduce", "--calc", "line-j", "(x"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("syntax error"));
}
