//! Manual audit cost for a codebase: `cargo run --example effort_model -- 1957`.
use acr::eval::{estimate_effort, EffortParams};

fn main() {
    let ksigloc: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1957.0);
    let p = EffortParams::default();
    match estimate_effort(&p, ksigloc) {
        Ok(e) => {
            println!("{ksigloc} kSigLoC");
            println!("  {:.2} s per alert", e.sec_per_alert);
            println!("  {:.2} s per kSigLoC", e.sec_per_ksigloc);
            println!("  {:.2} person-years", e.person_years);
            let half = estimate_effort(&EffortParams { fix_fraction: p.fix_fraction / 2.0, ..p }, ksigloc).unwrap();
            println!("  {:.2} person-years if half as many alerts need a fix", half.person_years);
        }
        Err(err) => eprintln!("{err}"),
    }
}
