//! Rank guidelines by how often an analyzer flags them.
use std::path::Path;

use acr::eval::{frequency_report, Grouping};
use acr::ingest::parse_cppcheck_xml;
use acr::{map_alert, CheckerMapping};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/freq/git_cppcheck.xml");
    let m = CheckerMapping::builtin();
    let alerts: Vec<_> = parse_cppcheck_xml(&std::fs::read(path)?)?.alerts.iter().map(|a| map_alert(a, &m)).collect();
    print!("{}", frequency_report(&alerts, Grouping::ToolCodebase).render_table());
    Ok(())
}
