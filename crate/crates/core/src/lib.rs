//! Automated repair of static-analysis alerts in C code.
//!
//! The pipeline ingests analyzer reports into [`Alert`]s, maps each to a
//! CERT C guideline, resolves it to a [`RepairSite`], and rewrites the
//! source when the site is not entangled with conditional compilation.

pub mod alert;
pub mod cli;
pub mod eval;
pub mod ingest;
pub mod scan;
pub mod repair;
pub mod site;
pub mod view;

pub use alert::{alert_key, load_mapping, map_alert, Alert, CheckerMapping, GuidelineId, Tool};
pub use site::{infer_error_strategy, locate_site, ErrorStrategy, FunctionContext, RepairSite, ValueCategory};
