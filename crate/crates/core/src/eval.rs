//! Recurrence diffing, guideline frequency ranking, SigLoC totals and the
//! manual-audit effort model.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use walkdir::WalkDir;

use crate::alert::{alert_key, Alert};
use crate::scan::count_sigloc;

const UNMAPPED: &str = "unmapped";

fn guideline_label(a: &Alert) -> String {
    a.guideline.as_ref().map_or_else(|| UNMAPPED.to_string(), |g| g.to_string())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecurrenceCounts {
    pub before: usize,
    pub after: usize,
    pub resolved: usize,
    pub persisting: usize,
    pub new: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecurrenceReport {
    pub resolved: Vec<Alert>,
    pub persisting: Vec<Alert>,
    pub new: Vec<Alert>,
    pub per_guideline: BTreeMap<String, RecurrenceCounts>,
}

impl RecurrenceReport {
    pub fn totals(&self) -> RecurrenceCounts {
        let mut t = RecurrenceCounts::default();
        for c in self.per_guideline.values() {
            t.before += c.before;
            t.after += c.after;
            t.resolved += c.resolved;
            t.persisting += c.persisting;
            t.new += c.new;
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("guideline,before,after,resolved,persisting,new\n");
        for (g, c) in &self.per_guideline {
            let _ = writeln!(out, "{g},{},{},{},{},{}", c.before, c.after, c.resolved, c.persisting, c.new);
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("{:<10} {:>8} {:>8} {:>9} {:>10} {:>6}\n", "guideline", "before", "after", "resolved", "persisting", "new");
        let row = |out: &mut String, g: &str, c: &RecurrenceCounts| {
            let _ = writeln!(out, "{g:<10} {:>8} {:>8} {:>9} {:>10} {:>6}", c.before, c.after, c.resolved, c.persisting, c.new);
        };
        for (g, c) in &self.per_guideline {
            row(&mut out, g, c);
        }
        row(&mut out, "total", &self.totals());
        out
    }
}

/// Matches alerts by key as multisets: each `after` alert consumes at most
/// one `before` alert with the same key.
pub fn diff_alert_sets(before: &[Alert], after: &[Alert]) -> RecurrenceReport {
    let mut pending: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, a) in before.iter().enumerate().rev() {
        pending.entry(alert_key(a)).or_default().push(i);
    }
    let mut matched = vec![false; before.len()];
    let mut report = RecurrenceReport::default();
    for a in after {
        match pending.get_mut(&alert_key(a)).and_then(Vec::pop) {
            Some(i) => {
                matched[i] = true;
                report.persisting.push(before[i].clone());
            }
            None => report.new.push(a.clone()),
        }
    }
    for (i, a) in before.iter().enumerate() {
        if !matched[i] {
            report.resolved.push(a.clone());
        }
    }
    let mut per = BTreeMap::<String, RecurrenceCounts>::new();
    for a in before {
        per.entry(guideline_label(a)).or_default().before += 1;
    }
    for a in after {
        per.entry(guideline_label(a)).or_default().after += 1;
    }
    for a in &report.resolved {
        per.entry(guideline_label(a)).or_default().resolved += 1;
    }
    for a in &report.persisting {
        per.entry(guideline_label(a)).or_default().persisting += 1;
    }
    for a in &report.new {
        per.entry(guideline_label(a)).or_default().new += 1;
    }
    report.per_guideline = per;
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    ToolCodebase,
    Tool,
    Codebase,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub tool: String,
    pub codebase: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedGuideline {
    pub rank: usize,
    pub guideline: String,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyGroup {
    pub ranking: Vec<RankedGuideline>,
    pub total: usize,
    pub unmapped: usize,
}

impl FrequencyGroup {
    pub fn distinct(&self) -> usize {
        self.ranking.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyReport {
    pub groups: BTreeMap<GroupKey, FrequencyGroup>,
}

/// Codebase label: the first component of the alert's path.
pub fn codebase_of(a: &Alert) -> String {
    a.file.components().next().map_or_else(String::new, |c| c.as_os_str().to_string_lossy().into_owned())
}

fn group_key(a: &Alert, codebase: &dyn Fn(&Alert) -> String, grouping: Grouping) -> GroupKey {
    let all = || "*".to_string();
    match grouping {
        Grouping::ToolCodebase => GroupKey { tool: a.tool.to_string(), codebase: codebase(a) },
        Grouping::Tool => GroupKey { tool: a.tool.to_string(), codebase: all() },
        Grouping::Codebase => GroupKey { tool: all(), codebase: codebase(a) },
        Grouping::All => GroupKey { tool: all(), codebase: all() },
    }
}

/// Counts alerts per guideline within each group and ranks them by
/// descending count, ties alphabetical.
pub fn frequency_report(alerts: &[Alert], grouping: Grouping) -> FrequencyReport {
    frequency_report_with(alerts, grouping, &codebase_of)
}

pub fn frequency_report_with(alerts: &[Alert], grouping: Grouping, codebase: &dyn Fn(&Alert) -> String) -> FrequencyReport {
    let mut counts: BTreeMap<GroupKey, (BTreeMap<String, usize>, usize, usize)> = BTreeMap::new();
    for a in alerts {
        let entry = counts.entry(group_key(a, codebase, grouping)).or_default();
        entry.1 += 1;
        match &a.guideline {
            Some(g) => *entry.0.entry(g.to_string()).or_default() += 1,
            None => entry.2 += 1,
        }
    }
    let groups = counts
        .into_iter()
        .map(|(k, (per, total, unmapped))| {
            let mut list: Vec<(String, usize)> = per.into_iter().collect();
            list.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let ranking = list
                .into_iter()
                .enumerate()
                .map(|(i, (guideline, count))| RankedGuideline { rank: i + 1, guideline, count })
                .collect();
            (k, FrequencyGroup { ranking, total, unmapped })
        })
        .collect();
    FrequencyReport { groups }
}

impl FrequencyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tool,codebase,guideline,count,rank\n");
        for (k, g) in &self.groups {
            for r in &g.ranking {
                let _ = writeln!(out, "{},{},{},{},{}", k.tool, k.codebase, r.guideline, r.count, r.rank);
            }
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for (k, g) in &self.groups {
            let _ = writeln!(out, "{} / {}", k.tool, k.codebase);
            let _ = writeln!(out, "{:>4}  {:<10} {:>7}", "rank", "guideline", "count");
            for r in &g.ranking {
                let _ = writeln!(out, "{:>4}  {:<10} {:>7}", r.rank, r.guideline, r.count);
            }
            let _ = writeln!(out, "total {}, distinct {}, unmapped {}\n", g.total, g.distinct(), g.unmapped);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffortParams {
    pub audit_seconds_per_alert: f64,
    pub fix_fraction: f64,
    pub fix_seconds_per_alert: f64,
    pub alerts_per_ksigloc: f64,
    pub person_year_seconds: f64,
}

impl Default for EffortParams {
    fn default() -> Self {
        EffortParams {
            audit_seconds_per_alert: 117.0,
            fix_fraction: 0.32,
            fix_seconds_per_alert: 117.0,
            alerts_per_ksigloc: 364.5,
            person_year_seconds: 31_536_000.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EffortError {
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
    #[error("fix fraction {0} is outside [0, 1]")]
    FixFraction(f64),
    #[error("negative size {0} kSigLoC")]
    NegativeSize(f64),
}

impl EffortParams {
    pub fn validate(&self) -> Result<(), EffortError> {
        for (name, v) in [
            ("audit seconds per alert", self.audit_seconds_per_alert),
            ("fix seconds per alert", self.fix_seconds_per_alert),
            ("alerts per kSigLoC", self.alerts_per_ksigloc),
            ("person-year seconds", self.person_year_seconds),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(EffortError::NonPositive(name));
            }
        }
        if !(0.0..=1.0).contains(&self.fix_fraction) {
            return Err(EffortError::FixFraction(self.fix_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffortEstimate {
    pub sec_per_alert: f64,
    pub sec_per_ksigloc: f64,
    pub person_years: f64,
}

pub fn estimate_effort(p: &EffortParams, ksigloc: f64) -> Result<EffortEstimate, EffortError> {
    p.validate()?;
    if ksigloc.is_nan() || ksigloc < 0.0 {
        return Err(EffortError::NegativeSize(ksigloc));
    }
    let sec_per_alert = p.audit_seconds_per_alert + p.fix_fraction * p.fix_seconds_per_alert;
    let sec_per_ksigloc = sec_per_alert * p.alerts_per_ksigloc;
    Ok(EffortEstimate { sec_per_alert, sec_per_ksigloc, person_years: ksigloc * sec_per_ksigloc / p.person_year_seconds })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiglocReport {
    pub files: BTreeMap<PathBuf, usize>,
    pub total: usize,
    /// Files that could not be read or scanned, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl SiglocReport {
    pub fn ksigloc(&self) -> f64 {
        self.total as f64 / 1000.0
    }
}

pub const DEFAULT_EXTENSIONS: &[&str] = &["c", "h"];

/// SigLoC for every file under `root` with one of `extensions`.
pub fn sigloc_report(root: &Path, extensions: &[&str]) -> std::io::Result<SiglocReport> {
    fs::metadata(root)?;
    let mut report = SiglocReport::default();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
                report.skipped.push((path, e.to_string()));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if !extensions.contains(&ext) {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
        let counted = fs::read(path).map_err(|e| e.to_string()).and_then(|src| count_sigloc(&src).map_err(|e| e.to_string()));
        match counted {
            Ok(n) => {
                report.total += n;
                report.files.insert(rel, n);
            }
            Err(reason) => report.skipped.push((rel, reason)),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::{GuidelineId, Tool};

    fn a(file: &str, line: usize, g: Option<&str>) -> Alert {
        let mut a = Alert::new(Tool::ClangTidy, "c", file, line, None, "").unwrap();
        a.guideline = g.map(|g| GuidelineId::parse(g).unwrap());
        a
    }

    #[test]
    fn set_algebra() {
        let before = [a("x.c", 1, Some("EXP34-C")), a("x.c", 2, Some("EXP34-C"))];
        let after = [a("x.c", 2, Some("EXP34-C")), a("x.c", 3, Some("EXP33-C"))];
        let r = diff_alert_sets(&before, &after);
        assert_eq!(r.resolved, vec![before[0].clone()]);
        assert_eq!(r.persisting, vec![before[1].clone()]);
        assert_eq!(r.new, vec![after[1].clone()]);
        assert_eq!(r.per_guideline["EXP34-C"], RecurrenceCounts { before: 2, after: 1, resolved: 1, persisting: 1, new: 0 });
    }

    #[test]
    fn duplicate_keys_match_as_multiset() {
        let before = [a("x.c", 1, Some("EXP34-C")), a("x.c", 1, Some("EXP34-C"))];
        let after = [a("x.c", 1, Some("EXP34-C"))];
        let r = diff_alert_sets(&before, &after);
        assert_eq!((r.resolved.len(), r.persisting.len(), r.new.len()), (1, 1, 0));
    }

    #[test]
    fn ranking_ties_alphabetical() {
        let alerts = [a("x/a.c", 1, Some("MSC12-C")), a("x/a.c", 2, Some("DCL19-C")), a("x/a.c", 3, None)];
        let r = frequency_report(&alerts, Grouping::ToolCodebase);
        let g = &r.groups[&GroupKey { tool: "clang-tidy".into(), codebase: "x".into() }];
        assert_eq!(g.ranking[0].guideline, "DCL19-C");
        assert_eq!(g.ranking[1].rank, 2);
        assert_eq!((g.total, g.unmapped, g.distinct()), (3, 1, 2));
        assert!(frequency_report(&[], Grouping::All).groups.is_empty());
    }

    #[test]
    fn effort_defaults() {
        let e = estimate_effort(&EffortParams::default(), 1957.0).unwrap();
        assert!((e.sec_per_alert - 154.44).abs() < 1e-9);
        assert!((e.sec_per_ksigloc - 56_293.38).abs() < 1e-6);
        assert!((e.person_years - 3.4934).abs() < 1e-3);
        let bad = EffortParams { fix_fraction: 1.5, ..EffortParams::default() };
        assert_eq!(estimate_effort(&bad, 1.0), Err(EffortError::FixFraction(1.5)));
        assert!(estimate_effort(&EffortParams::default(), -1.0).is_err());
    }

    #[test]
    fn sigloc_walk() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.c"), "int a;\n\n// c\nint b;\n").unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/b.h"), "/* x */\nint c;\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "int d;\n").unwrap();
        let r = sigloc_report(dir.path(), DEFAULT_EXTENSIONS).unwrap();
        assert_eq!(r.total, 3);
        assert_eq!(r.files.len(), 2);
        let empty = tempfile::tempdir().unwrap();
        assert_eq!(sigloc_report(empty.path(), DEFAULT_EXTENSIONS).unwrap().total, 0);
    }
}
