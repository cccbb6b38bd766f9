//! Repair templates, edit application, and the per-file repair pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use similar::TextDiff;
use thiserror::Error;

use crate::alert::{alert_key, Alert, GuidelineId};
use crate::scan::{classify_with, directive_name, RangeClass, TokenKind};
use crate::site::{
    enclosing_function, find_declaration, infer_error_strategy, locate_site, DeclLookup, RepairSite, SiteDetail,
    StrategyConfig, ValueCategory,
};
use crate::view::SourceView;

pub const SUPPORT_HEADER_NAME: &str = "acr.h";
pub const INCLUDE_LINE: &str = "#include \"acr.h\"";

const SUPPORT_HEADER: &str = r#"#ifndef ACR_H
#define ACR_H
#include <stdlib.h>
#define null_check(e, handler) (__extension__({ \
    __typeof__(e) acr_v_ = (e); \
    if (!acr_v_) { handler; abort(); } \
    acr_v_; }))
#define null_check_lv(e, handler) (*(__extension__({ \
    __typeof__(&(e)) acr_p_ = &(e); \
    if (!*acr_p_) { handler; abort(); } \
    acr_p_; })))
#endif
"#;

/// Contents of the support header that defines the null-check macros.
pub fn emit_support_header() -> &'static str {
    SUPPORT_HEADER
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditReason {
    Guideline(GuidelineId),
    SupportInclude,
}

impl fmt::Display for EditReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditReason::Guideline(g) => write!(f, "{g}"),
            EditReason::SupportInclude => f.write_str("include"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub file: PathBuf,
    pub byte_range: Range<usize>,
    pub replacement: String,
    pub reason: EditReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Repaired,
    DismissedFalsePositive,
    SkippedAlreadyRepaired,
    SkippedDependent,
    SkippedNotIndependent,
    SkippedUnsupported(String),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Repaired => "Repaired",
            Status::DismissedFalsePositive => "DismissedFalsePositive",
            Status::SkippedAlreadyRepaired => "SkippedAlreadyRepaired",
            Status::SkippedDependent => "SkippedDependent",
            Status::SkippedNotIndependent => "SkippedNotIndependent",
            Status::SkippedUnsupported(_) => "SkippedUnsupported",
        }
    }

    pub fn is_decline(&self) -> bool {
        matches!(self, Status::SkippedNotIndependent | Status::SkippedUnsupported(_))
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::SkippedUnsupported(r) => write!(f, "SkippedUnsupported ({r})"),
            s => f.write_str(s.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub alert_key: String,
    pub alert: Alert,
    pub status: Status,
    pub edits: Vec<Edit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    Patch,
    InPlace,
    Check,
}

#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub strategy: StrategyConfig,
    pub msc12_enabled: bool,
    pub mode: OutputMode,
    pub backup: bool,
    pub workers: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { strategy: StrategyConfig::default(), msc12_enabled: false, mode: OutputMode::Patch, backup: true, workers: 1 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("edits overlap at bytes {first:?} and {second:?}")]
pub struct OverlapError {
    pub first: Range<usize>,
    pub second: Range<usize>,
}

fn collides(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start == b.start || (a.start < b.end && b.start < a.end)
}

/// Applies `edits` to `source`, last edit first so earlier offsets stay
/// valid.
pub fn apply_edits(source: &[u8], edits: &[Edit]) -> Result<Vec<u8>, OverlapError> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.byte_range.start, e.byte_range.end));
    for w in sorted.windows(2) {
        if collides(&w[0].byte_range, &w[1].byte_range) {
            return Err(OverlapError { first: w[0].byte_range.clone(), second: w[1].byte_range.clone() });
        }
    }
    let mut out = source.to_vec();
    for e in sorted.iter().rev() {
        let r = e.byte_range.start.min(out.len())..e.byte_range.end.min(out.len());
        out.splice(r, e.replacement.bytes());
    }
    Ok(out)
}

/// Offset at which the support include belongs: after the leading run of
/// comments, blank lines and `#include` lines. `None` if already present.
pub fn include_insertion(view: &SourceView<'_>) -> Option<(usize, String)> {
    let mut pos = 0;
    let mut seen = false;
    for tok in &view.tokens {
        match tok.kind {
            TokenKind::Whitespace => {}
            TokenKind::Comment => {
                pos = tok.range.end;
                seen = true;
            }
            TokenKind::DirectiveLine => {
                let text = tok.text(view.src);
                if directive_name(text) != b"include" {
                    break;
                }
                pos = tok.range.end;
                seen = true;
            }
            _ => break,
        }
    }
    if view.tokens.iter().any(|t| {
        t.kind == TokenKind::DirectiveLine && {
            let text = String::from_utf8_lossy(t.text(view.src));
            text.split_whitespace().collect::<Vec<_>>().join(" ").replace("# include", "#include") == INCLUDE_LINE
        }
    }) {
        return None;
    }
    if !seen {
        return Some((0, format!("{INCLUDE_LINE}\n")));
    }
    // move past the end of the line holding the last leading token
    let src = view.src;
    while pos < src.len() && src[pos] != b'\n' {
        pos += 1;
    }
    if pos < src.len() {
        Some((pos + 1, format!("{INCLUDE_LINE}\n")))
    } else {
        Some((pos, format!("\n{INCLUDE_LINE}\n")))
    }
}

/// Adds the support include to `source` if it is not already there.
pub fn ensure_include(source: &[u8]) -> Result<Vec<u8>, crate::scan::ScanError> {
    let view = SourceView::new(source)?;
    Ok(match include_insertion(&view) {
        Some((at, text)) => {
            let mut out = source.to_vec();
            out.splice(at..at, text.bytes());
            out
        }
        None => source.to_vec(),
    })
}

fn strip_parens<'a>(view: &SourceView<'a>, mut a: usize, mut b: usize) -> (usize, usize) {
    while b > a + 1 && view.is(a, "(") && view.partner(a) == Some(b) {
        a += 1;
        b -= 1;
    }
    (a, b)
}

fn token_bounds(view: &SourceView<'_>, range: &Range<usize>) -> Option<(usize, usize)> {
    let a = view.token_at_or_after(range.start)?;
    let mut b = a;
    while b + 1 < view.len() && view.range(b + 1).end <= range.end {
        b += 1;
    }
    Some((a, b))
}

fn is_guard_macro(name: &str) -> bool {
    name == "null_check" || name == "null_check_lv"
}

/// Whether the site shows signs of an earlier repair.
pub fn already_repaired(view: &SourceView<'_>, site: &RepairSite) -> bool {
    match &site.detail {
        SiteDetail::NullDeref => {
            let Some((a, b)) = token_bounds(view, &site.expr_range) else {
                return false;
            };
            let wrapped = a >= 2 && view.is(a - 1, "(") && is_guard_macro(view.text(a - 2)) && view.is(b + 1, ",");
            let is_guard = is_guard_macro(view.text(a)) && view.is(a + 1, "(") && view.partner(a + 1) == Some(b);
            wrapped || is_guard
        }
        SiteDetail::Uninit(DeclLookup::Local(d)) => d.has_initializer,
        SiteDetail::VoidCast | SiteDetail::LabelAbsent => true,
        _ => false,
    }
}

/// Expressions that cannot be null whatever the analyzer thinks.
fn provably_non_null(view: &SourceView<'_>, site: &RepairSite) -> bool {
    let Some((a, b)) = token_bounds(view, &site.expr_range) else {
        return false;
    };
    let (a, b) = strip_parens(view, a, b);
    if view.is(a, "&") && a < b {
        return true;
    }
    if (a..=b).all(|k| view.kind(k) == TokenKind::String) {
        return true;
    }
    if a != b || !view.is_name(a) {
        return false;
    }
    let name = view.text(a);
    match find_declaration(view, a, name) {
        DeclLookup::Local(d) => d.is_array,
        DeclLookup::Parameter | DeclLookup::Extern => false,
        DeclLookup::NotFound => (0..view.len()).any(|k| {
            view.is(k, name) && view.brace_depth(k) == 0 && view.is(k + 1, "(") && k > 0 && !view.is(k - 1, "(")
        }) || file_scope_array(view, name),
    }
}

fn file_scope_array(view: &SourceView<'_>, name: &str) -> bool {
    (0..view.len()).any(|k| view.is(k, name) && view.brace_depth(k) == 0 && view.paren_depth(k) == 0 && view.is(k + 1, "["))
}

fn independent(view: &SourceView<'_>, range: &Range<usize>) -> bool {
    classify_with(&view.directives, range) == RangeClass::Independent
}

enum Plan {
    Done(Status),
    Edit(Status, Vec<Edit>),
}

fn plan_repair(view: &SourceView<'_>, site: &RepairSite, file: &Path, cfg: &RepairConfig) -> Plan {
    let guideline = site.alert.guideline.clone().expect("located sites are mapped");
    let edit = |range: Range<usize>, text: String| Edit {
        file: file.to_path_buf(),
        byte_range: range,
        replacement: text,
        reason: EditReason::Guideline(guideline.clone()),
    };
    let unsupported = |r: &str| Plan::Done(Status::SkippedUnsupported(r.to_string()));
    match &site.detail {
        SiteDetail::NullDeref => {
            if !independent(view, &site.expr_range) {
                return Plan::Done(Status::SkippedNotIndependent);
            }
            if already_repaired(view, site) {
                return Plan::Done(Status::SkippedAlreadyRepaired);
            }
            if provably_non_null(view, site) {
                return Plan::Done(Status::DismissedFalsePositive);
            }
            let macro_name = match site.value_category {
                ValueCategory::Rvalue => "null_check",
                ValueCategory::AddressableLvalue => "null_check_lv",
                ValueCategory::NonAddressableLvalue => return unsupported("non-addressable lvalue"),
            };
            let text = view.slice(site.expr_range.clone());
            if text.contains('\n') {
                return unsupported("multi-line expression");
            }
            let f = enclosing_function(view, site.expr_range.start);
            let handler = infer_error_strategy(f.as_ref(), &cfg.strategy).render();
            Plan::Edit(Status::Repaired, vec![edit(site.expr_range.clone(), format!("{macro_name}({text}, {handler})"))])
        }
        SiteDetail::Uninit(lookup) => match lookup {
            DeclLookup::Local(d) => {
                if !independent(view, &d.extent) {
                    return Plan::Done(Status::SkippedNotIndependent);
                }
                if d.has_initializer {
                    return Plan::Done(Status::SkippedAlreadyRepaired);
                }
                let at = d.range.end;
                Plan::Edit(Status::Repaired, vec![edit(at..at, format!(" = {}", d.zero))])
            }
            DeclLookup::Parameter => unsupported("parameter declaration"),
            DeclLookup::Extern => unsupported("extern declaration"),
            DeclLookup::NotFound => unsupported("no declaration"),
        },
        _ if !cfg.msc12_enabled => unsupported("MSC12 disabled"),
        SiteDetail::VoidCast | SiteDetail::LabelAbsent => Plan::Done(Status::SkippedAlreadyRepaired),
        SiteDetail::DeadAssignment { lhs } => {
            if !independent(view, &site.stmt_range) {
                return Plan::Done(Status::SkippedNotIndependent);
            }
            Plan::Edit(Status::Repaired, vec![edit(lhs.clone(), "(void) ".into())])
        }
        SiteDetail::UnusedLabel { delete, referenced } => {
            if *referenced {
                return unsupported("label is referenced");
            }
            if !independent(view, delete) {
                return Plan::Done(Status::SkippedNotIndependent);
            }
            Plan::Edit(Status::Repaired, vec![edit(delete.clone(), String::new())])
        }
        SiteDetail::OtherIneffective(reason) => unsupported(reason),
    }
}

/// Sort key used for dependent suppression and report order.
pub fn alert_order(a: &Alert) -> (PathBuf, usize, usize, &'static str, String, String) {
    (a.file.clone(), a.line, a.column.unwrap_or(0), a.tool.as_str(), a.checker_id.clone(), a.message.clone())
}

/// Marks every located site whose expression overlaps an earlier one.
/// Returns one flag per site: `true` if it is a dependent.
pub fn suppress_dependents(sites: &[&RepairSite]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by_key(|&i| alert_order(&sites[i].alert));
    let mut kept: Vec<usize> = Vec::new();
    let mut dependent = vec![false; sites.len()];
    for i in order {
        let r = &sites[i].expr_range;
        let overlaps = kept.iter().any(|&j| {
            let q = &sites[j].expr_range;
            sites[j].alert.file == sites[i].alert.file && r.start < q.end && q.start < r.end
        });
        if overlaps {
            dependent[i] = true;
        } else {
            kept.push(i);
        }
    }
    dependent
}

/// Result of repairing one file in memory.
#[derive(Debug, Clone)]
pub struct FileRepair {
    pub file: PathBuf,
    pub outcomes: Vec<RepairOutcome>,
    /// All edits for the file, including the support include.
    pub edits: Vec<Edit>,
    pub original: Vec<u8>,
    pub repaired: Vec<u8>,
}

impl FileRepair {
    pub fn changed(&self) -> bool {
        self.original != self.repaired
    }

    /// Maps a 1-based line and column in the original to the repaired text.
    pub fn relocate(&self, line: usize, column: Option<usize>) -> (usize, Option<usize>) {
        let before = line_starts(&self.original);
        let after = line_starts(&self.repaired);
        let Some(&ls) = before.get(line.wrapping_sub(1)) else {
            return (line, column);
        };
        let off = ls + column.map_or(0, |c| c - 1);
        let mut sorted: Vec<&Edit> = self.edits.iter().collect();
        sorted.sort_by_key(|e| e.byte_range.start);
        let mut delta: isize = 0;
        let mut mapped = None;
        for e in sorted {
            let r = &e.byte_range;
            if r.start > off {
                break;
            }
            if off < r.end {
                let inner = std::str::from_utf8(&self.original[r.clone()]).ok().and_then(|orig| e.replacement.find(orig));
                let start = (r.start as isize + delta) as usize;
                mapped = Some(match inner {
                    Some(i) => start + i + (off - r.start),
                    None => start,
                });
                break;
            }
            delta += e.replacement.len() as isize - r.len() as isize;
        }
        let new_off = mapped.unwrap_or((off as isize + delta) as usize);
        let new_line = after.partition_point(|&s| s <= new_off);
        let new_col = column.map(|_| new_off - after[new_line - 1] + 1);
        (new_line, new_col)
    }
}

fn line_starts(src: &[u8]) -> Vec<usize> {
    let mut v = vec![0];
    v.extend(src.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i + 1));
    v
}

fn outcome(alert: &Alert, status: Status, edits: Vec<Edit>) -> RepairOutcome {
    RepairOutcome { alert_key: alert_key(alert), alert: alert.clone(), status, edits }
}

/// Repairs one file's alerts against `source`. Alerts must all name `file`.
pub fn repair_source(file: &Path, source: &[u8], alerts: &[Alert], cfg: &RepairConfig) -> FileRepair {
    let mut alerts: Vec<Alert> = alerts.to_vec();
    alerts.sort_by_key(alert_order);
    let unchanged = |outcomes| FileRepair {
        file: file.to_path_buf(),
        outcomes,
        edits: Vec::new(),
        original: source.to_vec(),
        repaired: source.to_vec(),
    };
    let view = match SourceView::new(source) {
        Ok(v) => v,
        Err(e) => {
            let reason = format!("scan error: {e}");
            return unchanged(alerts.iter().map(|a| outcome(a, Status::SkippedUnsupported(reason.clone()), Vec::new())).collect());
        }
    };

    let mut statuses: Vec<Option<Status>> = vec![None; alerts.len()];
    let mut located: Vec<(usize, RepairSite)> = Vec::new();
    for (i, a) in alerts.iter().enumerate() {
        if a.guideline.as_ref().is_some_and(|g| *g == GuidelineId::ineffective_code()) && !cfg.msc12_enabled {
            statuses[i] = Some(Status::SkippedUnsupported("MSC12 disabled".into()));
            continue;
        }
        match locate_site(&view, a) {
            Ok(site) => located.push((i, site)),
            Err(e) => statuses[i] = Some(Status::SkippedUnsupported(e.to_string())),
        }
    }
    let refs: Vec<&RepairSite> = located.iter().map(|(_, s)| s).collect();
    let dependent = suppress_dependents(&refs);

    let mut accepted: Vec<Edit> = Vec::new();
    let mut per_alert: Vec<Vec<Edit>> = vec![Vec::new(); alerts.len()];
    for ((i, site), dep) in located.iter().zip(dependent) {
        if dep {
            statuses[*i] = Some(Status::SkippedDependent);
            continue;
        }
        match plan_repair(&view, site, file, cfg) {
            Plan::Done(s) => statuses[*i] = Some(s),
            Plan::Edit(s, edits) => {
                if edits.iter().any(|e| accepted.iter().any(|a| collides(&a.byte_range, &e.byte_range))) {
                    statuses[*i] = Some(Status::SkippedDependent);
                    continue;
                }
                accepted.extend(edits.iter().cloned());
                per_alert[*i] = edits;
                statuses[*i] = Some(s);
            }
        }
    }

    let needs_header = per_alert.iter().flatten().any(|e| matches!(&e.reason, EditReason::Guideline(g) if *g == GuidelineId::null_deref()));
    if needs_header {
        if let Some((at, text)) = include_insertion(&view) {
            accepted.push(Edit { file: file.to_path_buf(), byte_range: at..at, replacement: text, reason: EditReason::SupportInclude });
        }
    }
    let repaired = match apply_edits(source, &accepted) {
        Ok(r) => r,
        Err(e) => {
            // an include colliding with a repair; fall back to no include
            let reason = format!("edit conflict: {e}");
            return unchanged(alerts.iter().map(|a| outcome(a, Status::SkippedUnsupported(reason.clone()), Vec::new())).collect());
        }
    };
    let outcomes = alerts
        .iter()
        .zip(statuses)
        .zip(per_alert)
        .map(|((a, s), edits)| outcome(a, s.expect("every alert gets a status"), edits))
        .collect();
    accepted.sort_by_key(|e| e.byte_range.start);
    FileRepair { file: file.to_path_buf(), outcomes, edits: accepted, original: source.to_vec(), repaired }
}

#[derive(Debug, Clone, Default)]
pub struct RepairReport {
    pub outcomes: Vec<RepairOutcome>,
    pub edits: BTreeMap<PathBuf, Vec<Edit>>,
    pub counts: BTreeMap<(String, String), usize>,
    pub header_emitted: bool,
    pub files: Vec<FileRepair>,
}

impl RepairReport {
    fn from_files(files: Vec<FileRepair>) -> Self {
        let mut report = RepairReport::default();
        for f in &files {
            for o in &f.outcomes {
                let g = o.alert.guideline.as_ref().map_or("unmapped".to_string(), |g| g.to_string());
                *report.counts.entry((g, o.status.to_string())).or_default() += 1;
                report.outcomes.push(o.clone());
            }
            if !f.edits.is_empty() {
                report.edits.insert(f.file.clone(), f.edits.clone());
            }
        }
        report.files = files;
        report
    }

    pub fn count(&self, status: &str) -> usize {
        self.outcomes.iter().filter(|o| o.status.name() == status).count()
    }

    pub fn edit_count(&self) -> usize {
        self.edits.values().map(Vec::len).sum()
    }

    pub fn has_declines(&self) -> bool {
        self.outcomes.iter().any(|o| o.status.is_decline())
    }

    /// Moves alert positions recorded against the original sources onto the
    /// repaired ones.
    pub fn relocate(&self, alerts: &[Alert]) -> Vec<Alert> {
        alerts
            .iter()
            .map(|a| {
                let mut a = a.clone();
                if let Some(f) = self.files.iter().find(|f| f.file == a.file) {
                    let (line, column) = f.relocate(a.line, a.column);
                    a.line = line;
                    a.column = column;
                }
                a
            })
            .collect()
    }

    /// Guideline by status table.
    pub fn render_summary(&self) -> String {
        let mut statuses: Vec<&str> = Vec::new();
        let mut rows: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        for ((g, s), n) in &self.counts {
            if !statuses.contains(&s.as_str()) {
                statuses.push(s);
            }
            *rows.entry(g).or_default().entry(s).or_default() += n;
        }
        statuses.sort();
        let mut out = String::new();
        let width = statuses.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
        out.push_str(&format!("{:<width$}", "status"));
        for g in rows.keys() {
            out.push_str(&format!(" {g:>9}"));
        }
        out.push_str(&format!(" {:>9}\n", "total"));
        for s in &statuses {
            out.push_str(&format!("{s:<width$}"));
            let mut total = 0;
            for counts in rows.values() {
                let n = counts.get(s).copied().unwrap_or(0);
                total += n;
                out.push_str(&format!(" {n:>9}"));
            }
            out.push_str(&format!(" {total:>9}\n"));
        }
        out.push_str(&format!("{:<width$}", "total"));
        for counts in rows.values() {
            out.push_str(&format!(" {:>9}", counts.values().sum::<usize>()));
        }
        out.push_str(&format!(" {:>9}\n", self.outcomes.len()));
        out
    }

    /// One line per outcome.
    pub fn render_outcomes(&self) -> String {
        self.outcomes
            .iter()
            .map(|o| format!("{}\t{}\t{}\n", o.alert_key, o.alert.tool, o.status))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("source root {0} is not a readable directory")]
    Root(PathBuf),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Default)]
pub struct RepairRun {
    pub report: RepairReport,
    /// Unified diff for every changed file (empty in check mode).
    pub patch: String,
}

/// Unified diff between two versions of `path`.
pub fn unified_diff(path: &str, old: &[u8], new: &[u8]) -> String {
    let old = String::from_utf8_lossy(old);
    let new = String::from_utf8_lossy(new);
    let diff = TextDiff::from_lines(old.as_ref(), new.as_ref());
    diff.unified_diff().context_radius(3).header(&format!("a/{path}"), &format!("b/{path}")).to_string()
}

fn header_patch() -> String {
    let lines: Vec<&str> = SUPPORT_HEADER.lines().collect();
    let mut out = format!("--- /dev/null\n+++ b/{SUPPORT_HEADER_NAME}\n@@ -0,0 +1,{} @@\n", lines.len());
    for l in lines {
        out.push('+');
        out.push_str(l);
        out.push('\n');
    }
    out
}

/// Repairs every alerted file under `root`.
pub fn run_repair(root: &Path, alerts: &[Alert], cfg: &RepairConfig) -> Result<RepairRun, RepairError> {
    if !root.is_dir() {
        return Err(RepairError::Root(root.to_path_buf()));
    }
    let mut by_file: BTreeMap<PathBuf, Vec<Alert>> = BTreeMap::new();
    for a in alerts {
        by_file.entry(a.file.clone()).or_default().push(a.clone());
    }
    let jobs: Vec<(PathBuf, Vec<Alert>)> = by_file.into_iter().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| RepairError::Pool(e.to_string()))?;
    let files: Vec<FileRepair> = pool.install(|| {
        jobs.par_iter()
            .map(|(file, alerts)| match fs::read(root.join(file)) {
                Ok(src) => repair_source(file, &src, alerts, cfg),
                Err(e) => {
                    let mut sorted = alerts.clone();
                    sorted.sort_by_key(alert_order);
                    let reason = format!("unreadable file: {}", e.kind());
                    FileRepair {
                        file: file.clone(),
                        outcomes: sorted.iter().map(|a| outcome(a, Status::SkippedUnsupported(reason.clone()), Vec::new())).collect(),
                        edits: Vec::new(),
                        original: Vec::new(),
                        repaired: Vec::new(),
                    }
                }
            })
            .collect()
    });
    let mut report = RepairReport::from_files(files);
    let any_guard = report.files.iter().any(|f| f.edits.iter().any(|e| e.reason == EditReason::SupportInclude))
        || report.files.iter().any(|f| f.changed() && f.repaired.windows(10).any(|w| w == b"null_check"));
    let header_path = root.join(SUPPORT_HEADER_NAME);
    let header_missing = fs::read(&header_path).map_or(true, |h| h != SUPPORT_HEADER.as_bytes());
    let mut patch = String::new();
    match cfg.mode {
        OutputMode::Check => {}
        OutputMode::Patch => {
            for f in report.files.iter().filter(|f| f.changed()) {
                patch.push_str(&unified_diff(&f.file.to_string_lossy(), &f.original, &f.repaired));
            }
            if any_guard && header_missing && !header_path.exists() {
                patch.push_str(&header_patch());
                report.header_emitted = true;
            }
        }
        OutputMode::InPlace => {
            for f in report.files.iter().filter(|f| f.changed()) {
                let path = root.join(&f.file);
                if cfg.backup {
                    let mut orig = path.clone().into_os_string();
                    orig.push(".orig");
                    fs::write(&orig, &f.original).map_err(|e| RepairError::Write { path: orig.into(), source: e })?;
                }
                fs::write(&path, &f.repaired).map_err(|e| RepairError::Write { path: path.clone(), source: e })?;
            }
            if any_guard && header_missing {
                fs::write(&header_path, SUPPORT_HEADER).map_err(|e| RepairError::Write { path: header_path.clone(), source: e })?;
                report.header_emitted = true;
            }
        }
    }
    Ok(RepairRun { report, patch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::{map_alert, CheckerMapping, Tool};

    fn alert(checker: &str, line: usize, col: Option<usize>, msg: &str) -> Alert {
        let tool = if checker.starts_with("clang") { Tool::ClangTidy } else { Tool::Cppcheck };
        map_alert(&Alert::new(tool, checker, "t.c", line, col, msg).unwrap(), &CheckerMapping::builtin())
    }

    fn col_of(src: &str, line: usize, needle: &str) -> usize {
        src.lines().nth(line - 1).unwrap().find(needle).unwrap() + 1
    }

    fn repair(src: &str, alerts: &[Alert], msc12: bool) -> FileRepair {
        let cfg = RepairConfig { msc12_enabled: msc12, ..RepairConfig::default() };
        repair_source(Path::new("t.c"), src.as_bytes(), alerts, &cfg)
    }

    fn text(f: &FileRepair) -> String {
        String::from_utf8(f.repaired.clone()).unwrap()
    }

    #[test]
    fn header_text_is_canonical() {
        let h = emit_support_header();
        assert!(h.starts_with("#ifndef ACR_H\n#define ACR_H\n#include <stdlib.h>\n"));
        assert!(h.contains("    if (!acr_v_) { handler; abort(); } \\\n"));
        assert!(h.ends_with("#endif\n"));
        assert_eq!(h.lines().count(), 12);
    }

    #[test]
    fn rvalue_deref_with_abort() {
        let src = "#include <stdio.h>\nint get(int *p) {\n  int x;\n  x = *p;\n  return x;\n}\n";
        let f = repair(src, &[alert("nullPointer", 4, Some(col_of(src, 4, "p;")), "")], false);
        assert_eq!(f.outcomes[0].status, Status::Repaired);
        assert_eq!(
            text(&f),
            "#include <stdio.h>\n#include \"acr.h\"\nint get(int *p) {\n  int x;\n  x = *null_check(p, abort());\n  return x;\n}\n"
        );
    }

    #[test]
    fn lvalue_deref_in_loop() {
        let src = "#include <stddef.h>\nsize_t count(const char **parent_names) {\n  const char *parent_name;\n  size_t n = 0;\n  while ((parent_name = *parent_names++)) {\n    n++;\n  }\n  return n;\n}\n";
        let f = repair(src, &[alert("nullPointer", 5, Some(col_of(src, 5, "parent_names++")), "")], false);
        assert_eq!(f.outcomes[0].status, Status::Repaired);
        assert!(text(&f).contains("  while ((parent_name = *null_check_lv(parent_names, abort())++)) {\n"));
    }

    #[test]
    fn dismissed_address_of() {
        let src = "struct s { int v; };\nint f(void) {\n  struct s st;\n  st.v = 1;\n  return (&st)->v;\n}\n";
        let f = repair(src, &[alert("nullPointer", 5, Some(col_of(src, 5, "->")), "")], false);
        assert_eq!(f.outcomes[0].status, Status::DismissedFalsePositive);
        assert!(!f.changed());
    }

    #[test]
    fn uninit_multi_declarator() {
        let src = "int f(int c) {\n  int a, b;\n  a = 1;\n  if (c) b = 2;\n  return a + b;\n}\n";
        let f = repair(src, &[alert("uninitvar", 5, Some(col_of(src, 5, "b;")), "Uninitialized variable: b")], false);
        assert_eq!(f.outcomes[0].status, Status::Repaired);
        assert!(text(&f).contains("  int a, b = 0;\n"));
        assert!(!text(&f).contains("acr.h"));
    }

    #[test]
    fn msc12_gate_and_templates() {
        let src = "int foo(int);\nvoid f(int a) {\n  int x;\n  x = foo(a);\ndone: ;\n}\n";
        let alerts = [
            alert("unreadVariable", 4, Some(3), "Variable 'x' is assigned a value that is never used."),
            alert("unusedLabel", 5, Some(1), "Label 'done' is not used."),
        ];
        let off = repair(src, &alerts, false);
        assert!(off.outcomes.iter().all(|o| o.status == Status::SkippedUnsupported("MSC12 disabled".into())));
        assert!(!off.changed());
        let on = repair(src, &alerts, true);
        assert!(on.outcomes.iter().all(|o| o.status == Status::Repaired), "{:?}", on.outcomes);
        assert_eq!(text(&on), "int foo(int);\nvoid f(int a) {\n  int x;\n  (void) foo(a);\n;\n}\n");
        let again = repair(&text(&on), &on_relocated(&on, &alerts), true);
        assert!(again.outcomes.iter().all(|o| o.status == Status::SkippedAlreadyRepaired), "{:?}", again.outcomes);
    }

    fn on_relocated(f: &FileRepair, alerts: &[Alert]) -> Vec<Alert> {
        RepairReport::from_files(vec![f.clone()]).relocate(alerts)
    }

    #[test]
    fn dependents_and_idempotence() {
        let src = "#include <stdlib.h>\nint f(int *p) {\n  return *p + 1;\n}\n";
        let c = col_of(src, 3, "p +");
        let alerts = [alert("nullPointer", 3, Some(c), ""), alert("clang-analyzer-core.NullDereference", 3, Some(c - 1), "")];
        let f = repair(src, &alerts, false);
        let statuses: Vec<&Status> = f.outcomes.iter().map(|o| &o.status).collect();
        assert_eq!(statuses.iter().filter(|s| ***s == Status::Repaired).count(), 1);
        assert_eq!(statuses.iter().filter(|s| ***s == Status::SkippedDependent).count(), 1);
        let relocated = on_relocated(&f, &alerts);
        let g = repair(&text(&f), &relocated, false);
        assert!(!g.changed());
        assert!(g.edits.is_empty());
    }

    #[test]
    fn apply_edits_rules() {
        let e = |r: Range<usize>, t: &str| Edit { file: "t.c".into(), byte_range: r, replacement: t.into(), reason: EditReason::SupportInclude };
        assert_eq!(apply_edits(b"abc\ndef\n", &[]).unwrap(), b"abc\ndef\n");
        assert_eq!(apply_edits(b"abc\ndef\n", &[e(1..2, "XX"), e(4..5, "Y"), e(3..3, "!")]).unwrap(), b"aXXc!\nYef\n");
        assert!(apply_edits(b"abcdef", &[e(1..4, ""), e(3..5, "")]).is_err());
        assert!(apply_edits(b"abcdef", &[e(2..2, "x"), e(2..3, "y")]).is_err());
    }

    #[test]
    fn include_placement() {
        assert_eq!(ensure_include(b"/* c */\n#include <a.h>\n\nint x;\n").unwrap(), b"/* c */\n#include <a.h>\n#include \"acr.h\"\n\nint x;\n");
        assert_eq!(ensure_include(b"int x;\n").unwrap(), b"#include \"acr.h\"\nint x;\n");
        let once = ensure_include(b"#include <a.h>\nint x;\n").unwrap();
        assert_eq!(ensure_include(&once).unwrap(), once);
        assert_eq!(ensure_include(b"#include <a.h>").unwrap(), b"#include <a.h>\n#include \"acr.h\"\n");
    }

    #[test]
    fn relocation_follows_edits() {
        let src = "#include <stdio.h>\nint get(int *p) {\n  int x;\n  x = *p + *p;\n  return x;\n}\n";
        let a = alert("nullPointer", 4, Some(8), "");
        let f = repair(src, std::slice::from_ref(&a), false);
        let moved = on_relocated(&f, &[a]);
        assert_eq!(moved[0].line, 5);
        let line = text(&f).lines().nth(4).unwrap().to_string();
        assert_eq!(&line[moved[0].column.unwrap() - 1..][..1], "p");
    }
}
