#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn mini(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/mini")
        .join(file)
}

pub fn golden(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(file)
}

pub fn service_goldens() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../service/tests/golden")
}

pub fn meshsuggest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshsuggest"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("running meshsuggest")
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The suggestion example, on MINI with fixture embeddings and replayed
/// PubMed answers.
pub fn suggest_example(out: &Path) -> Output {
    meshsuggest(&[
        "--model_dir",
        path(&mini("keywords.vec")),
        "--method",
        "Semantic-BERT",
        "--dataset",
        "MINI",
        "--output_file",
        path(out),
        "--email",
        "sample@gmail.com",
        "--interpolation_depth",
        "20",
        "--depth",
        "1",
        "--mesh_file",
        path(&mini("mesh.tsv")),
        "--mesh_encoding",
        path(&mini("mesh_encoding.vec")),
        "--semantic_model_path",
        path(&mini("w2v.vec")),
        "--replay",
        path(&mini("cassette.json")),
    ])
}

/// The evaluation example against the MINI judgments.
pub fn evaluate_example(run: &Path) -> Output {
    meshsuggest(&[
        "--evaluate_run",
        "--output_file",
        path(run),
        "--qrel",
        path(&mini("qrels.txt")),
    ])
}

/// Compares with a committed golden, rewriting it when MESHSUGGEST_BLESS is set.
pub fn matches_golden(file: &str, actual: &str) -> bool {
    let p = golden(file);
    if std::env::var_os("MESHSUGGEST_BLESS").is_some() {
        std::fs::write(&p, actual).unwrap();
    }
    std::fs::read_to_string(&p).is_ok_and(|want| want == actual)
}
