//! Zero-initialize a variable read before it is written.
use std::path::Path;

use acr::repair::{repair_source, unified_diff, RepairConfig};
use acr::{map_alert, Alert, CheckerMapping, Tool};

const SRC: &str = r#"struct point { int x, y; };

int area(int w) {
  int a, h;
  struct point origin;
  double scale;
  if (w > 0)
    h = w * 2;
  scale = origin.x;
  return a + w * h + (int) scale;
}
"#;

fn main() {
    let m = CheckerMapping::builtin();
    let alerts = [
        (10, 10, "Uninitialized variable: a"),
        (10, 22, "Uninitialized variable: h"),
        (9, 11, "Uninitialized struct member: origin.x"),
    ]
    .map(|(line, col, msg)| map_alert(&Alert::new(Tool::Cppcheck, "uninitvar", "area.c", line, Some(col), msg).unwrap(), &m));
    let r = repair_source(Path::new("area.c"), SRC.as_bytes(), &alerts, &RepairConfig::default());
    for o in &r.outcomes {
        println!("{}\t{}", o.alert_key, o.status);
    }
    print!("{}", unified_diff("area.c", &r.original, &r.repaired));
}
