//! Ineffective code repairs are opt-in: unread call results become
//! `(void)` casts and unused labels are dropped.
use std::path::Path;

use acr::repair::{repair_source, unified_diff, RepairConfig};
use acr::{map_alert, Alert, CheckerMapping, Tool};

const SRC: &str = r#"int compute(int);

int run(int a) {
  int x;
  x = compute(a);
done:
  return a;
}
"#;

fn main() {
    let m = CheckerMapping::builtin();
    let alerts = [
        Alert::new(Tool::Cppcheck, "unreadVariable", "run.c", 5, Some(5), "Variable 'x' is assigned a value that is never used.").unwrap(),
        Alert::new(Tool::ClangTidy, "clang-diagnostic-unused-label", "run.c", 6, Some(1), "unused label 'done'").unwrap(),
    ]
    .map(|a| map_alert(&a, &m));
    for enabled in [false, true] {
        let cfg = RepairConfig { msc12_enabled: enabled, ..RepairConfig::default() };
        let r = repair_source(Path::new("run.c"), SRC.as_bytes(), &alerts, &cfg);
        println!("msc12 enabled: {enabled}");
        for o in &r.outcomes {
            println!("  {}\t{}", o.alert_key, o.status);
        }
        print!("{}", unified_diff("run.c", &r.original, &r.repaired));
    }
}
