#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use acr::{map_alert, Alert, CheckerMapping, Tool};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_dir() -> PathBuf {
    crate_dir().join("tests/corpus")
}

pub fn data_dir() -> PathBuf {
    crate_dir().join("tests/data")
}

#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub alert: Alert,
    pub expected: String,
    /// Text the repaired file must contain; empty for declined alerts.
    pub expect_text: String,
}

fn unescape(s: &str) -> String {
    s.replace("\\n", "\n").replace("\\t", "\t")
}

pub fn manifest() -> Vec<ManifestRow> {
    let text = fs::read_to_string(corpus_dir().join("manifest.tsv")).expect("manifest.tsv");
    let mapping = CheckerMapping::builtin();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            assert!(f.len() >= 7, "short manifest row: {l}");
            let tool: Tool = f[3].parse().unwrap();
            let column = if f[2] == "-" { None } else { Some(f[2].parse().unwrap()) };
            let raw = Alert::new(tool, f[4], f[0], f[1].parse().unwrap(), column, f[6]).unwrap();
            ManifestRow {
                alert: map_alert(&raw, &mapping),
                expected: f[5].to_string(),
                expect_text: unescape(f.get(7).copied().unwrap_or("")),
            }
        })
        .collect()
}

pub fn manifest_alerts() -> Vec<Alert> {
    manifest().into_iter().map(|r| r.alert).collect()
}

/// Copies the `.c` and `.h` files of `src` into `dst`.
pub fn copy_sources(src: &Path, dst: &Path) {
    for entry in WalkDir::new(src).into_iter().filter_map(Result::ok) {
        let p = entry.path();
        if !entry.file_type().is_file() || !matches!(p.extension().and_then(|e| e.to_str()), Some("c" | "h")) {
            continue;
        }
        let rel = p.strip_prefix(src).unwrap();
        let out = dst.join(rel);
        fs::create_dir_all(out.parent().unwrap()).unwrap();
        fs::copy(p, out).unwrap();
    }
}

pub fn corpus_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_sources(&corpus_dir(), dir.path());
    dir
}

/// SHA-256 over sorted relative paths and contents of every file.
pub fn tree_hash(root: &Path) -> String {
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(root).unwrap().to_path_buf())
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(f.to_string_lossy().as_bytes());
        h.update([0]);
        let body = fs::read(root.join(&f)).unwrap();
        h.update((body.len() as u64).to_le_bytes());
        h.update(&body);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn have_program(name: &str) -> bool {
    Command::new(name).arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
}
