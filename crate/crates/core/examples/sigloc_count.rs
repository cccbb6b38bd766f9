//! Count significant lines (not blank, not comment-only) under a tree.
use std::path::PathBuf;

use acr::eval::{sigloc_report, DEFAULT_EXTENSIONS};

fn main() -> std::io::Result<()> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus"));
    let report = sigloc_report(&root, DEFAULT_EXTENSIONS)?;
    for (file, n) in report.files.iter().take(5) {
        println!("{n:>6}  {}", file.display());
    }
    if report.files.len() > 5 {
        println!("   ...  {} more files", report.files.len() - 5);
    }
    println!("{:>6}  total ({:.3} kSigLoC, {} skipped)", report.total, report.ksigloc(), report.skipped.len());
    Ok(())
}
