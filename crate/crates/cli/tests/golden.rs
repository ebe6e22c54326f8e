//! Pinned reports. Run with `QDIFF_BLESS=1` to rewrite the files after an
//! intended change of output.

mod common;

use common::{golden_path, qdiff};

fn golden(name: &str, args: &[&str]) {
    let out = qdiff(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    let path = golden_path(name);
    if std::env::var_os("QDIFF_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(out.stdout, want, "{name} differs from its golden file");
}

#[test]
fn reduce_json() {
    golden("reduce_line_j.json", &["--format", "json", "reduce", "--calc", "line-j", "x^2 d2x + q^2 dx"]);
}

#[test]
fn d_text() {
    golden("d_line_jbar.txt", &["d", "--calc", "line-jbar", "--times", "2", "x^3"]);
}

#[test]
fn qbinom_json() {
    golden("qbinom.json", &["--format", "json", "qbinom", "--N", "6", "--top", "4", "--bot", "2", "--root", "1"]);
}

#[test]
fn nogo_json() {
    golden("nogo_3.json", &["--format", "json", "nogo", "--N", "3"]);
}

#[test]
fn nogo_text() {
    golden("nogo_2.txt", &["nogo", "--N", "2"]);
}

#[test]
fn check_json() {
    golden("check_line_j.json", &["--format", "json", "check", "--calc", "line-j", "--samples", "25"]);
}

#[test]
fn flip_text() {
    golden(
        "flip_3.txt",
        &["flip-check", "--N", "3", "--braiding", "1", "--samples", "25", "--element", "x dx ox d2y"],
    );
}

#[test]
fn plane_text() {
    golden("plane_j.txt", &["plane-check", "--root", "j"]);
}

#[test]
fn plane_json() {
    golden("plane_jbar.json", &["--format", "json", "plane-check", "--root", "jbar"]);
}

#[test]
fn derive_text() {
    golden("derive_line_j.txt", &["derive-line", "--root", "j"]);
}

#[test]
fn export_text() {
    golden("export_line_jbar_cube.txt", &["export", "--calc", "line-jbar-cube"]);
}
