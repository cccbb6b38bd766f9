//! Guard a null dereference. An rvalue gets `null_check`, an operand that
//! is written through gets `null_check_lv`.
use std::path::Path;

use acr::repair::{repair_source, unified_diff, RepairConfig};
use acr::{map_alert, Alert, CheckerMapping, Tool};

const SRC: &str = r#"#include <stdlib.h>

int first(int *p) {
  return *p;
}

size_t count(const char **names) {
  const char *name;
  size_t n = 0;
  while ((name = *names++))
    n++;
  return n;
}
"#;

fn main() {
    let m = CheckerMapping::builtin();
    let alerts = [
        Alert::new(Tool::Cppcheck, "nullPointer", "demo.c", 4, Some(11), "Null pointer dereference: p").unwrap(),
        Alert::new(Tool::Cppcheck, "nullPointer", "demo.c", 10, Some(18), "Possible null pointer dereference: names").unwrap(),
    ]
    .map(|a| map_alert(&a, &m));
    let r = repair_source(Path::new("demo.c"), SRC.as_bytes(), &alerts, &RepairConfig::default());
    for o in &r.outcomes {
        println!("{}\t{}", o.alert_key, o.status);
    }
    print!("{}", unified_diff("demo.c", &r.original, &r.repaired));
}
