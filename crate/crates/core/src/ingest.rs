//! Parsers for analyzer output: Cppcheck `--xml` (version 2), clang-tidy
//! diagnostics, and a pipe-separated interchange format.

use std::borrow::Cow;
use std::path::Path;
use std::sync::OnceLock;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use regex::Regex;
use thiserror::Error;

use crate::alert::{Alert, AlertError, Tool};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub alerts: Vec<Alert>,
    pub skipped_lines: usize,
    /// (locus, reason). Locus is `line N` for line formats or `byte N` for XML.
    pub parse_notes: Vec<(String, String)>,
}

impl IngestReport {
    fn note(&mut self, locus: String, reason: impl Into<String>) {
        self.parse_notes.push((locus, reason.into()));
    }

    pub fn extend(&mut self, other: IngestReport) {
        self.alerts.extend(other.alerts);
        self.skipped_lines += other.skipped_lines;
        self.parse_notes.extend(other.parse_notes);
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("reading analyzer output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    CppcheckXml,
    ClangTidy,
    Generic,
}

impl Format {
    pub fn parse(name: &str) -> Option<Format> {
        Some(match name {
            "cppcheck-xml" => Format::CppcheckXml,
            "clang-tidy" => Format::ClangTidy,
            "generic" => Format::Generic,
            _ => return None,
        })
    }
}

/// Dispatches to the parser for `format`, then relativizes paths against
/// `root` when given.
pub fn parse(format: Format, input: &[u8], root: Option<&Path>) -> Result<IngestReport, IngestError> {
    match format {
        Format::CppcheckXml => parse_cppcheck_xml_rooted(input, root),
        Format::ClangTidy => Ok(parse_clang_tidy_rooted(&String::from_utf8_lossy(input), root)),
        Format::Generic => Ok(parse_generic(&String::from_utf8_lossy(input))),
    }
}

/// Strips `root` from absolute tool paths; relative paths pass through.
pub fn relativize<'a>(path: &'a str, root: Option<&Path>) -> Cow<'a, str> {
    let p = Path::new(path);
    if let Some(root) = root {
        if p.is_absolute() {
            if let Ok(rel) = p.strip_prefix(root) {
                return Cow::Owned(rel.to_string_lossy().into_owned());
            }
            if let Ok(canon) = root.canonicalize() {
                if let Ok(rel) = p.strip_prefix(&canon) {
                    return Cow::Owned(rel.to_string_lossy().into_owned());
                }
            }
        }
    }
    Cow::Borrowed(path)
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == name)
        .map(|a| match a.unescape_value() {
            Ok(v) => v.into_owned(),
            Err(_) => String::from_utf8_lossy(&a.value).into_owned(),
        })
}

struct PendingError {
    id: String,
    msg: String,
    severity: Option<String>,
    cwe: Option<u32>,
    offset: u64,
    first_location: Option<(String, Option<usize>, Option<usize>)>,
}

fn finish_error(report: &mut IngestReport, pending: PendingError, root: Option<&Path>) {
    let locus = format!("byte {}", pending.offset);
    let Some((file, line, column)) = pending.first_location else {
        report.note(locus, format!("<error id=\"{}\"> has no <location>", pending.id));
        return;
    };
    let Some(line) = line else {
        report.note(locus, "location without a line number");
        return;
    };
    let file = relativize(&file, root);
    match Alert::new(Tool::Cppcheck, pending.id, &file, line, column.filter(|&c| c > 0), pending.msg) {
        Ok(mut a) => {
            a.severity = pending.severity;
            a.cwe = pending.cwe;
            report.alerts.push(a);
        }
        Err(e) => report.note(locus, e.to_string()),
    }
}

pub fn parse_cppcheck_xml(input: &[u8]) -> Result<IngestReport, IngestError> {
    parse_cppcheck_xml_rooted(input, None)
}

pub fn parse_cppcheck_xml_rooted(input: &[u8], root: Option<&Path>) -> Result<IngestReport, IngestError> {
    let mut reader = Reader::from_reader(input);
    let mut report = IngestReport::default();
    let mut buf = Vec::new();
    let mut pending: Option<PendingError> = None;
    let mut depth = 0usize;
    let mut saw_root = false;
    loop {
        let offset = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::Xml { offset: reader.buffer_position(), message: e.to_string() })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                saw_root = true;
                match e.name().as_ref() {
                    b"error" => {
                        if let Some(done) = pending.take() {
                            finish_error(&mut report, done, root);
                        }
                        let next = PendingError {
                            id: attr(e, b"id").unwrap_or_else(|| "unknown".into()),
                            msg: attr(e, b"msg").or_else(|| attr(e, b"verbose")).unwrap_or_default(),
                            severity: attr(e, b"severity"),
                            cwe: attr(e, b"cwe").and_then(|c| c.parse().ok()),
                            offset,
                            first_location: None,
                        };
                        if empty {
                            finish_error(&mut report, next, root);
                        } else {
                            pending = Some(next);
                        }
                    }
                    b"location" => {
                        if let Some(p) = pending.as_mut() {
                            if p.first_location.is_none() {
                                p.first_location = Some((
                                    attr(e, b"file").unwrap_or_default(),
                                    attr(e, b"line").and_then(|l| l.parse().ok()),
                                    attr(e, b"column").and_then(|c| c.parse().ok()),
                                ));
                            }
                        }
                    }
                    _ => {}
                }
                if !empty {
                    depth += 1;
                }
            }
            Event::End(ref e) => {
                depth = depth.saturating_sub(1);
                if e.name().as_ref() == b"error" {
                    if let Some(done) = pending.take() {
                        finish_error(&mut report, done, root);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if depth != 0 || !saw_root {
        return Err(IngestError::Xml {
            offset: input.len() as u64,
            message: if saw_root { "unexpected end of document".into() } else { "no root element".into() },
        });
    }
    Ok(report)
}

fn clang_tidy_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?P<file>.+?):(?P<line>\d+):(?P<col>\d+): (?P<sev>warning|error): (?P<msg>.*?)(?: \[(?P<check>[A-Za-z0-9_.,\-]+)\])?\s*$")
            .unwrap()
    })
}

pub fn parse_clang_tidy(input: &str) -> IngestReport {
    parse_clang_tidy_rooted(input, None)
}

pub fn parse_clang_tidy_rooted(input: &str, root: Option<&Path>) -> IngestReport {
    let mut report = IngestReport::default();
    for (idx, line) in input.lines().enumerate() {
        let Some(caps) = clang_tidy_re().captures(line) else {
            report.skipped_lines += 1;
            continue;
        };
        let file = relativize(&caps["file"], root);
        // Overflowing numbers fall to the ZeroLine/ZeroColumn checks.
        let line_no = caps["line"].parse().unwrap_or(0);
        let col = caps["col"].parse().unwrap_or(0);
        let checker = caps.name("check").map_or("unknown", |m| m.as_str());
        match Alert::new(Tool::ClangTidy, checker, &file, line_no, Some(col), &caps["msg"]) {
            Ok(a) => report.alerts.push(a.with_severity(&caps["sev"])),
            Err(e) => {
                report.skipped_lines += 1;
                report.note(format!("line {}", idx + 1), e.to_string());
            }
        }
    }
    report
}

/// One record per line: `tool|checker|file|line|col|message`. The message
/// is the remainder of the line and may itself contain `|`.
pub fn parse_generic(input: &str) -> IngestReport {
    let mut report = IngestReport::default();
    for (idx, raw) in input.lines().enumerate() {
        let locus = format!("line {}", idx + 1);
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let fields: Vec<&str> = line.splitn(6, '|').collect();
        if fields.len() != 6 {
            report.skipped_lines += 1;
            report.note(locus, format!("expected 6 fields, found {}", fields.len()));
            continue;
        }
        let parsed = (|| -> Result<Alert, String> {
            let tool: Tool = fields[0].parse().map_err(|e: AlertError| e.to_string())?;
            let line_no: usize = fields[3].parse().map_err(|_| format!("bad line number `{}`", fields[3]))?;
            let col = if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse().map_err(|_| format!("bad column `{}`", fields[4]))?)
            };
            Alert::new(tool, fields[1], fields[2], line_no, col, fields[5]).map_err(|e| e.to_string())
        })();
        match parsed {
            Ok(a) => report.alerts.push(a),
            Err(reason) => {
                report.skipped_lines += 1;
                report.note(locus, reason);
            }
        }
    }
    report
}

/// Renders one alert as a generic-format record (no trailing newline).
pub fn format_generic(a: &Alert) -> String {
    let col = a.column.map(|c| c.to_string()).unwrap_or_default();
    let message = a.message.replace(['\n', '\r'], " ");
    format!("{}|{}|{}|{}|{}|{}", a.tool, a.checker_id, a.file_str(), a.line, col, message)
}

pub fn write_generic(alerts: &[Alert]) -> String {
    let mut out = String::new();
    for a in alerts {
        out.push_str(&format_generic(a));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cppcheck_single_error() {
        let xml = br#"<?xml version="1.0" encoding="UTF-8"?>
<results version="2"><cppcheck version="2.9"/><errors>
<error id="nullPointer" severity="error" msg="Null pointer dereference" cwe="476"><location file="a.c" line="7" column="5"/></error>
</errors></results>"#;
        let r = parse_cppcheck_xml(xml).unwrap();
        assert_eq!(r.alerts.len(), 1);
        let a = &r.alerts[0];
        assert_eq!((a.tool, a.checker_id.as_str(), a.file_str(), a.line, a.column), (Tool::Cppcheck, "nullPointer", "a.c".into(), 7, Some(5)));
        assert_eq!(a.cwe, Some(476));
        assert_eq!(a.severity.as_deref(), Some("error"));
    }

    #[test]
    fn cppcheck_empty_results() {
        let r = parse_cppcheck_xml(br#"<results version="2"/>"#).unwrap();
        assert!(r.alerts.is_empty());
    }

    #[test]
    fn cppcheck_first_location_wins() {
        let xml = br#"<results version="2"><errors><error id="nullPointer" msg="m">
<location file="b.c" line="9" column="2"/><location file="b.c" line="4" column="1"/>
</error></errors></results>"#;
        let r = parse_cppcheck_xml(xml).unwrap();
        assert_eq!(r.alerts.len(), 1);
        assert_eq!((r.alerts[0].line, r.alerts[0].column), (9, Some(2)));
    }

    #[test]
    fn cppcheck_locationless_error_is_noted() {
        let xml = br#"<results version="2"><errors><error id="missingInclude" msg="m"/><error id="x" msg="y"></error></errors></results>"#;
        let r = parse_cppcheck_xml(xml).unwrap();
        assert!(r.alerts.is_empty());
        assert_eq!(r.parse_notes.len(), 2);
    }

    #[test]
    fn cppcheck_malformed_reports_offset() {
        let err = parse_cppcheck_xml(b"<results><errors></results>").unwrap_err();
        assert!(matches!(err, IngestError::Xml { .. }), "{err}");
        let err = parse_cppcheck_xml(b"<results><errors>").unwrap_err();
        assert!(matches!(err, IngestError::Xml { offset: 17, .. }), "{err}");
    }

    #[test]
    fn clang_tidy_lines() {
        let log = "src/x.c:12:9: warning: Dereference of null pointer [clang-analyzer-core.NullDereference]\n      ^\n";
        let r = parse_clang_tidy(log);
        assert_eq!(r.alerts.len(), 1);
        assert_eq!(r.skipped_lines, 1);
        let a = &r.alerts[0];
        assert_eq!((a.checker_id.as_str(), a.file_str(), a.line, a.column), ("clang-analyzer-core.NullDereference", "src/x.c".into(), 12, Some(9)));
        assert_eq!(a.message, "Dereference of null pointer");
    }

    #[test]
    fn clang_tidy_without_check_name() {
        let r = parse_clang_tidy("a.c:1:2: error: something broke\n");
        assert_eq!(r.alerts[0].checker_id, "unknown");
        assert_eq!(r.alerts[0].message, "something broke");
        let empty = parse_clang_tidy("");
        assert!(empty.alerts.is_empty());
        assert_eq!(empty.skipped_lines, 0);
    }

    #[test]
    fn clang_tidy_absolute_paths_are_relativized() {
        let r = parse_clang_tidy_rooted("/work/src/x.c:3:1: warning: w [c]\n", Some(Path::new("/work")));
        assert_eq!(r.alerts[0].file_str(), "src/x.c");
    }

    #[test]
    fn generic_records() {
        let r = parse_generic("rosecheckers|MSC12-C|y.c|3||unused value\nonly|three|fields\n");
        assert_eq!(r.alerts.len(), 1);
        assert_eq!(r.alerts[0].column, None);
        assert_eq!(r.alerts[0].tool, Tool::Rosecheckers);
        assert_eq!(r.skipped_lines, 1);
        assert_eq!(r.parse_notes[0].0, "line 2");
    }

    #[test]
    fn generic_message_keeps_pipes() {
        let r = parse_generic("generic|c|a.c|1|2|a | b\n");
        assert_eq!(r.alerts[0].message, "a | b");
        assert_eq!(write_generic(&r.alerts), "generic|c|a.c|1|2|a | b\n");
    }
}
