//! How a byte range sits against `#if` groups decides whether it may be
//! rewritten.
use acr::scan::{classify_range, scan_directives};

fn show(label: &str, src: &str, needle_start: &str, needle_end: &str) {
    let start = src.find(needle_start).unwrap();
    let end = src.rfind(needle_end).unwrap() + needle_end.len();
    let class = classify_range(src.as_bytes(), start..end).unwrap();
    println!("{label:<12} {class:?}\t{:?}", &src[start..end]);
}

fn main() {
    let inside = "x =\n#ifdef WINDOWS\n  a+b;\n#else\n  c;\n#endif\n";
    show("inside", inside, "a+b", "a+b");

    let whole = "x =\n#ifdef WINDOWS\n  a\n#else\n  c\n#endif\n  + b;\n";
    show("whole group", whole, "#ifdef", "+ b");

    let split = "x =\n#ifdef WINDOWS\n  a +\n#else\n  a *\n#endif\n  b;\n";
    show("straddling", split, "a +", "b;");

    for d in scan_directives(split.as_bytes()).unwrap() {
        println!("  line {} {:?} group {} depth {}", d.line, d.kind, d.group_id, d.depth);
    }
}
