//! Diff alert dumps from before and after a repair run.
use std::path::Path;

use acr::eval::diff_alert_sets;
use acr::ingest::parse_generic;
use acr::{map_alert, CheckerMapping};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/recurrence");
    let m = CheckerMapping::builtin();
    let load = |name: &str| -> std::io::Result<Vec<_>> {
        let text = std::fs::read_to_string(dir.join(name))?;
        Ok(parse_generic(&text).alerts.iter().map(|a| map_alert(a, &m)).collect())
    };
    let report = diff_alert_sets(&load("git_clang_tidy_before.txt")?, &load("git_clang_tidy_after.txt")?);
    print!("{}", report.render_table());
    let t = report.totals();
    println!("repaired {} of {} alerts", t.resolved, t.before);
    Ok(())
}
