#![allow(dead_code)]

use std::path::PathBuf;

use qdiff_cli::{run, Outcome};

pub fn qdiff(args: &[&str]) -> Outcome {
    run(std::iter::once("qdiff").chain(args.iter().copied()))
}

pub fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

pub fn golden_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect()
}
