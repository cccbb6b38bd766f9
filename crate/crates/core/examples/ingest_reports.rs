//! Parse the shipped Cppcheck and clang-tidy samples, map them to CERT
//! guidelines, and print one normalized dump.
use std::path::Path;

use acr::ingest::{format_generic, parse, Format};
use acr::{map_alert, CheckerMapping};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/parsers");
    let mapping = CheckerMapping::builtin();
    let inputs = [
        (Format::CppcheckXml, "cppcheck_sample.xml", "/work/project"),
        (Format::ClangTidy, "clang_tidy_sample.log", "/home/dev/project"),
    ];
    for (format, name, root) in inputs {
        let report = parse(format, &std::fs::read(data.join(name))?, Some(Path::new(root)))?;
        println!("# {name}: {} alerts, {} notes", report.alerts.len(), report.parse_notes.len());
        for a in &report.alerts {
            let a = map_alert(a, &mapping);
            let g = a.guideline.as_ref().map_or("unmapped".to_string(), |g| g.to_string());
            println!("{g:<8} {}", format_generic(&a));
        }
    }
    Ok(())
}
