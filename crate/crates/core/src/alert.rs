//! Normalized static-analysis alerts and the checker-to-guideline mapping.

use std::collections::HashMap;
use std::fmt;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tool {
    Cppcheck,
    ClangTidy,
    Rosecheckers,
    Generic,
}

impl Tool {
    pub fn as_str(self) -> &'static str {
        match self {
            Tool::Cppcheck => "cppcheck",
            Tool::ClangTidy => "clang-tidy",
            Tool::Rosecheckers => "rosecheckers",
            Tool::Generic => "generic",
        }
    }
}

impl fmt::Display for Tool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tool {
    type Err = AlertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "cppcheck" => Tool::Cppcheck,
            "clang-tidy" => Tool::ClangTidy,
            "rosecheckers" => Tool::Rosecheckers,
            "generic" => Tool::Generic,
            other => return Err(AlertError::UnknownTool(other.to_string())),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlertError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("line must be >= 1")]
    ZeroLine,
    #[error("column must be >= 1")]
    ZeroColumn,
    #[error("empty file path")]
    EmptyPath,
    #[error("path `{0}` escapes the source root")]
    EscapingPath(String),
    #[error("`{0}` is not a guideline id (expected e.g. EXP34-C)")]
    BadGuidelineId(String),
}

/// Lexically normalizes a relative path: drops `.` components, folds `..`
/// and rejects anything that climbs out of the root.
pub fn normalize_path(raw: &str) -> Result<PathBuf, AlertError> {
    if raw.is_empty() {
        return Err(AlertError::EmptyPath);
    }
    let mut parts: Vec<&std::ffi::OsStr> = Vec::new();
    for comp in Path::new(raw).components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => {
                if parts.pop().is_none() {
                    return Err(AlertError::EscapingPath(raw.to_string()));
                }
            }
            Component::Normal(p) => parts.push(p),
            Component::RootDir | Component::Prefix(_) => {
                return Err(AlertError::EscapingPath(raw.to_string()))
            }
        }
    }
    if parts.is_empty() {
        return Err(AlertError::EmptyPath);
    }
    Ok(parts.iter().collect())
}

/// A CERT C guideline id such as `EXP34-C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuidelineId(String);

fn guideline_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Z]{3}[0-9]{2}-C$").unwrap())
}

impl GuidelineId {
    pub fn parse(text: &str) -> Result<Self, AlertError> {
        if guideline_re().is_match(text) {
            Ok(GuidelineId(text.to_string()))
        } else {
            Err(AlertError::BadGuidelineId(text.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn null_deref() -> Self {
        GuidelineId("EXP34-C".into())
    }

    pub fn uninit_read() -> Self {
        GuidelineId("EXP33-C".into())
    }

    pub fn ineffective_code() -> Self {
        GuidelineId("MSC12-C".into())
    }

    pub fn is_repairable(&self) -> bool {
        REPAIRABLE.contains(&self.0.as_str())
    }
}

impl fmt::Display for GuidelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The guidelines the repair engine has templates for.
pub const REPAIRABLE: [&str; 3] = ["EXP34-C", "EXP33-C", "MSC12-C"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guideline {
    pub id: GuidelineId,
    pub title: &'static str,
    /// CERT priority, 1 through 27.
    pub priority: u8,
    pub repairable: bool,
}

// (id, title, priority)
const GUIDELINES: &[(&str, &str, u8)] = &[
    ("ARR30-C", "Do not form or use out-of-bounds pointers or array subscripts", 18),
    ("ARR38-C", "Guarantee that library functions do not form invalid pointers", 18),
    ("DCL00-C", "Const-qualify immutable objects", 1),
    ("DCL01-C", "Do not reuse variable names in subscopes", 2),
    ("DCL19-C", "Minimize the scope of variables and functions", 2),
    ("DCL30-C", "Declare objects with appropriate storage durations", 6),
    ("DCL40-C", "Do not create incompatible declarations of the same function or object", 2),
    ("EXP00-C", "Use parentheses for precedence of operation", 4),
    ("EXP12-C", "Do not ignore values returned by functions", 4),
    ("EXP30-C", "Do not depend on the order of evaluation for side effects", 8),
    ("EXP33-C", "Do not read uninitialized memory", 12),
    ("EXP34-C", "Do not dereference null pointers", 18),
    ("EXP46-C", "Do not use a bitwise operator with a Boolean-like operand", 6),
    ("FIO42-C", "Close files when they are no longer needed", 4),
    ("FIO47-C", "Use valid format strings", 6),
    ("INT13-C", "Use bitwise operators only on unsigned operands", 6),
    ("INT31-C", "Ensure that integer conversions do not result in lost or misinterpreted data", 6),
    ("INT32-C", "Ensure that operations on signed integers do not result in overflow", 9),
    ("INT34-C", "Do not shift an expression by a negative number of bits or by greater than or equal to the number of bits that exist in the operand", 4),
    ("MEM30-C", "Do not access freed memory", 18),
    ("MEM31-C", "Free dynamically allocated memory when no longer needed", 8),
    ("MSC12-C", "Detect and remove code that has no effect or is never executed", 2),
    ("MSC13-C", "Detect and remove unused values", 2),
    ("MSC37-C", "Ensure that control never reaches the end of a non-void function", 9),
    ("PRE03-C", "Prefer typedefs to defines for encoding non-pointer types", 2),
    ("STR31-C", "Guarantee that storage for strings has sufficient space for character data and the null terminator", 18),
];

/// The builtin guideline table.
pub fn guidelines() -> &'static [Guideline] {
    static TABLE: OnceLock<Vec<Guideline>> = OnceLock::new();
    TABLE.get_or_init(|| {
        GUIDELINES
            .iter()
            .map(|&(id, title, priority)| {
                let id = GuidelineId::parse(id).expect("builtin guideline ids are well formed");
                Guideline { repairable: id.is_repairable(), id, title, priority }
            })
            .collect()
    })
}

pub fn guideline(id: &str) -> Option<&'static Guideline> {
    guidelines().iter().find(|g| g.id.as_str() == id)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alert {
    pub tool: Tool,
    pub checker_id: String,
    pub file: PathBuf,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
    pub guideline: Option<GuidelineId>,
    pub cwe: Option<u32>,
    pub severity: Option<String>,
}

impl Alert {
    /// Builds an unmapped alert, normalizing the path and checking the
    /// position invariants.
    pub fn new(
        tool: Tool,
        checker_id: impl Into<String>,
        file: &str,
        line: usize,
        column: Option<usize>,
        message: impl Into<String>,
    ) -> Result<Self, AlertError> {
        if line == 0 {
            return Err(AlertError::ZeroLine);
        }
        if column == Some(0) {
            return Err(AlertError::ZeroColumn);
        }
        Ok(Alert {
            tool,
            checker_id: checker_id.into(),
            file: normalize_path(file)?,
            line,
            column,
            message: message.into(),
            guideline: None,
            cwe: None,
            severity: None,
        })
    }

    pub fn with_severity(mut self, severity: impl Into<String>) -> Self {
        self.severity = Some(severity.into());
        self
    }

    pub fn file_str(&self) -> String {
        self.file.to_string_lossy().replace('\\', "/")
    }
}

/// Column-insensitive identity of a finding: `file:line:guideline`, or the
/// checker id when the alert is unmapped.
pub fn alert_key(a: &Alert) -> String {
    let tag = a.guideline.as_ref().map_or(a.checker_id.as_str(), |g| g.as_str());
    format!("{}:{}:{}", a.file_str(), a.line, tag)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedChecker {
    pub guideline: GuidelineId,
    pub cwe: Option<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("mapping line {line}: expected 4 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("mapping line {line}: {source}")]
    Field { line: usize, source: AlertError },
    #[error("mapping line {line}: `{value}` is not a CWE number")]
    Cwe { line: usize, value: String },
    #[error("mapping line {line}: guideline {id} is not in the guideline table")]
    UnknownGuideline { line: usize, id: String },
}

/// Immutable `(tool, checker) -> guideline` lookup.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckerMapping {
    entries: HashMap<(Tool, String), MappedChecker>,
}

// tool, checker, guideline, cwe
const BUILTIN_MAPPING: &[(Tool, &str, &str, Option<u32>)] = &[
    (Tool::ClangTidy, "clang-analyzer-core.NullDereference", "EXP34-C", Some(476)),
    (Tool::ClangTidy, "clang-analyzer-core.NonNullParamChecker", "EXP34-C", Some(476)),
    (Tool::ClangTidy, "clang-analyzer-unix.cstring.NullArg", "EXP34-C", Some(476)),
    (Tool::ClangTidy, "clang-analyzer-core.uninitialized.Assign", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-core.uninitialized.Branch", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-core.uninitialized.UndefReturn", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-core.uninitialized.ArraySubscript", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-core.CallAndMessage", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-core.UndefinedBinaryOperatorResult", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-diagnostic-uninitialized", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-diagnostic-sometimes-uninitialized", "EXP33-C", Some(457)),
    (Tool::ClangTidy, "clang-analyzer-deadcode.DeadStores", "MSC12-C", Some(563)),
    (Tool::ClangTidy, "clang-diagnostic-unused-label", "MSC12-C", Some(561)),
    (Tool::ClangTidy, "clang-diagnostic-unused-variable", "MSC13-C", Some(563)),
    (Tool::ClangTidy, "clang-diagnostic-unused-but-set-variable", "MSC13-C", Some(563)),
    (Tool::ClangTidy, "clang-analyzer-unix.Malloc", "MEM31-C", Some(401)),
    (Tool::ClangTidy, "clang-analyzer-security.insecureAPI.strcpy", "STR31-C", Some(120)),
    (Tool::ClangTidy, "bugprone-narrowing-conversions", "INT31-C", Some(681)),
    (Tool::ClangTidy, "hicpp-signed-bitwise", "INT13-C", None),
    (Tool::Cppcheck, "nullPointer", "EXP34-C", Some(476)),
    (Tool::Cppcheck, "nullPointerRedundantCheck", "EXP34-C", Some(476)),
    (Tool::Cppcheck, "nullPointerArithmetic", "EXP34-C", Some(476)),
    (Tool::Cppcheck, "ctunullpointer", "EXP34-C", Some(476)),
    (Tool::Cppcheck, "uninitvar", "EXP33-C", Some(457)),
    (Tool::Cppcheck, "uninitdata", "EXP33-C", Some(457)),
    (Tool::Cppcheck, "uninitStructMember", "EXP33-C", Some(457)),
    (Tool::Cppcheck, "legacyUninitvar", "EXP33-C", Some(457)),
    (Tool::Cppcheck, "unreadVariable", "MSC12-C", Some(563)),
    (Tool::Cppcheck, "redundantAssignment", "MSC12-C", Some(563)),
    (Tool::Cppcheck, "unusedLabel", "MSC12-C", Some(561)),
    (Tool::Cppcheck, "unsignedLessThanZero", "MSC12-C", Some(570)),
    (Tool::Cppcheck, "unsignedPositive", "MSC12-C", Some(571)),
    (Tool::Cppcheck, "unusedVariable", "MSC13-C", Some(563)),
    (Tool::Cppcheck, "unusedStructMember", "MSC13-C", Some(563)),
    (Tool::Cppcheck, "variableScope", "DCL19-C", Some(398)),
    (Tool::Cppcheck, "shadowVariable", "DCL01-C", Some(398)),
    (Tool::Cppcheck, "shadowArgument", "DCL01-C", Some(398)),
    (Tool::Cppcheck, "shadowFunction", "DCL01-C", Some(398)),
    (Tool::Cppcheck, "constVariable", "DCL00-C", Some(398)),
    (Tool::Cppcheck, "constParameter", "DCL00-C", Some(398)),
    (Tool::Cppcheck, "arrayIndexOutOfBounds", "ARR30-C", Some(788)),
    (Tool::Cppcheck, "bufferAccessOutOfBounds", "ARR38-C", Some(788)),
    (Tool::Cppcheck, "ignoredReturnValue", "EXP12-C", Some(252)),
    (Tool::Cppcheck, "resourceLeak", "FIO42-C", Some(775)),
    (Tool::Cppcheck, "invalidPrintfArgType_sint", "FIO47-C", Some(686)),
    (Tool::Cppcheck, "shiftTooManyBits", "INT34-C", Some(758)),
    (Tool::Cppcheck, "integerOverflow", "INT32-C", Some(190)),
    (Tool::Cppcheck, "doubleFree", "MEM30-C", Some(415)),
    (Tool::Cppcheck, "memleak", "MEM31-C", Some(401)),
    (Tool::Cppcheck, "missingReturn", "MSC37-C", Some(758)),
    (Tool::Cppcheck, "clarifyCalculation", "EXP00-C", Some(783)),
];

impl CheckerMapping {
    pub fn builtin() -> Self {
        let entries = BUILTIN_MAPPING
            .iter()
            .map(|&(tool, checker, id, cwe)| {
                let guideline = GuidelineId::parse(id).expect("builtin mapping ids are well formed");
                ((tool, checker.to_string()), MappedChecker { guideline, cwe })
            })
            .collect();
        CheckerMapping { entries }
    }

    pub fn get(&self, tool: Tool, checker: &str) -> Option<&MappedChecker> {
        self.entries.get(&(tool, checker.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, tool: Tool, checker: impl Into<String>, mapped: MappedChecker) {
        self.entries.insert((tool, checker.into()), mapped);
    }

    /// Parses a user table and layers it over `self`.
    pub fn merge_tsv(&mut self, text: &str) -> Result<(), MappingError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim_end_matches('\r');
            if row.trim().is_empty() || row.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = row.split('\t').collect();
            if fields.len() != 4 {
                return Err(MappingError::FieldCount { line, found: fields.len() });
            }
            let tool: Tool = fields[0].trim().parse().map_err(|source| MappingError::Field { line, source })?;
            let guideline =
                GuidelineId::parse(fields[2].trim()).map_err(|source| MappingError::Field { line, source })?;
            if self::guideline(guideline.as_str()).is_none() {
                return Err(MappingError::UnknownGuideline { line, id: guideline.to_string() });
            }
            let cwe_text = fields[3].trim();
            let cwe = if cwe_text.is_empty() || cwe_text == "-" {
                None
            } else {
                let digits = cwe_text.strip_prefix("CWE-").unwrap_or(cwe_text);
                Some(digits.parse().map_err(|_| MappingError::Cwe { line, value: cwe_text.to_string() })?)
            };
            self.insert(tool, fields[1].trim(), MappedChecker { guideline, cwe });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LoadMappingError {
    #[error("reading mapping {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] MappingError),
}

/// Loads the builtin table, optionally overridden by a TSV file. Passing
/// `"builtin"` or `None` yields the builtin table alone.
pub fn load_mapping(path: Option<&Path>) -> Result<CheckerMapping, LoadMappingError> {
    let mut mapping = CheckerMapping::builtin();
    let Some(path) = path.filter(|p| *p != Path::new("builtin")) else {
        return Ok(mapping);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadMappingError::Io { path: path.to_path_buf(), source })?;
    mapping.merge_tsv(&text)?;
    Ok(mapping)
}

/// Fills in guideline and CWE from the mapping. Existing guidelines are
/// never overwritten by a miss. Rosecheckers and generic alerts whose
/// checker id is itself a known guideline map to that guideline.
pub fn map_alert(a: &Alert, m: &CheckerMapping) -> Alert {
    let mut out = a.clone();
    if let Some(hit) = m.get(a.tool, &a.checker_id) {
        out.guideline = Some(hit.guideline.clone());
        out.cwe = hit.cwe.or(a.cwe);
    } else if out.guideline.is_none()
        && matches!(a.tool, Tool::Rosecheckers | Tool::Generic)
        && guideline(&a.checker_id).is_some()
    {
        out.guideline = GuidelineId::parse(&a.checker_id).ok();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alert(tool: Tool, checker: &str, file: &str, line: usize, col: Option<usize>) -> Alert {
        Alert::new(tool, checker, file, line, col, "m").unwrap()
    }

    #[test]
    fn builtin_contains_clang_null_checkers() {
        let m = load_mapping(Some(Path::new("builtin"))).unwrap();
        let hit = m.get(Tool::ClangTidy, "clang-analyzer-core.NullDereference").unwrap();
        assert_eq!(hit.guideline.as_str(), "EXP34-C");
        let hit = m.get(Tool::ClangTidy, "clang-analyzer-core.NonNullParamChecker").unwrap();
        assert_eq!(hit.guideline.as_str(), "EXP34-C");
        for (checker, g) in [
            ("nullPointer", "EXP34-C"),
            ("uninitvar", "EXP33-C"),
            ("unreadVariable", "MSC12-C"),
            ("redundantAssignment", "MSC12-C"),
            ("unusedLabel", "MSC12-C"),
        ] {
            assert_eq!(m.get(Tool::Cppcheck, checker).unwrap().guideline.as_str(), g);
        }
    }

    #[test]
    fn builtin_guidelines_are_in_table() {
        for &(_, _, id, _) in BUILTIN_MAPPING {
            assert!(guideline(id).is_some(), "{id}");
        }
        for g in guidelines() {
            assert!((1..=27).contains(&g.priority));
        }
        let repairable: Vec<_> = guidelines().iter().filter(|g| g.repairable).map(|g| g.id.as_str()).collect();
        assert_eq!(repairable, vec!["EXP33-C", "EXP34-C", "MSC12-C"]);
    }

    #[test]
    fn empty_user_file_is_identity() {
        let mut m = CheckerMapping::builtin();
        m.merge_tsv("").unwrap();
        m.merge_tsv("# only a comment\n\n").unwrap();
        assert_eq!(m, CheckerMapping::builtin());
    }

    #[test]
    fn user_row_round_trips() {
        let mut m = CheckerMapping::default();
        m.merge_tsv("cppcheck\tuninitvar\tEXP33-C\t457\n").unwrap();
        let hit = m.get(Tool::Cppcheck, "uninitvar").unwrap();
        assert_eq!((hit.guideline.as_str(), hit.cwe), ("EXP33-C", Some(457)));
    }

    #[test]
    fn user_rows_override_builtin() {
        let mut m = CheckerMapping::builtin();
        m.merge_tsv("cppcheck\tnullPointer\tEXP33-C\t-\n").unwrap();
        assert_eq!(m.get(Tool::Cppcheck, "nullPointer").unwrap().guideline.as_str(), "EXP33-C");
        assert_eq!(m.len(), CheckerMapping::builtin().len());
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let mut m = CheckerMapping::default();
        let err = m.merge_tsv("# header\ncppcheck\tnullPointer\tEXP34-C\n").unwrap_err();
        assert_eq!(err, MappingError::FieldCount { line: 2, found: 3 });
        let err = m.merge_tsv("cppcheck\tx\texp34-c\t1\n").unwrap_err();
        assert!(matches!(err, MappingError::Field { line: 1, source: AlertError::BadGuidelineId(_) }));
        let err = m.merge_tsv("cppcheck\tx\tEXP34-C\tlots\n").unwrap_err();
        assert!(matches!(err, MappingError::Cwe { line: 1, .. }));
    }

    #[test]
    fn map_alert_cases() {
        let m = CheckerMapping::builtin();
        let a = map_alert(&alert(Tool::Cppcheck, "nullPointer", "a.c", 3, None), &m);
        assert_eq!(a.guideline, Some(GuidelineId::null_deref()));
        assert_eq!(a.cwe, Some(476));

        let a = map_alert(&alert(Tool::Cppcheck, "someUnknownCheck", "a.c", 3, None), &m);
        assert_eq!(a.guideline, None);

        let mut pre = alert(Tool::Generic, "custom", "a.c", 3, None);
        pre.guideline = Some(GuidelineId::null_deref());
        assert_eq!(map_alert(&pre, &m).guideline, Some(GuidelineId::null_deref()));

        let rose = map_alert(&alert(Tool::Rosecheckers, "MSC12-C", "y.c", 3, None), &m);
        assert_eq!(rose.guideline, Some(GuidelineId::ineffective_code()));
    }

    #[test]
    fn keys_ignore_tool_and_column() {
        let m = CheckerMapping::builtin();
        let a = map_alert(&alert(Tool::Cppcheck, "nullPointer", "src/x.c", 12, Some(9)), &m);
        let b = map_alert(&alert(Tool::ClangTidy, "clang-analyzer-core.NullDereference", "src/x.c", 12, Some(3)), &m);
        assert_eq!(alert_key(&a), alert_key(&b));
        assert_eq!(alert_key(&a), "src/x.c:12:EXP34-C");
        let c = map_alert(&alert(Tool::Cppcheck, "nullPointer", "src/x.c", 13, Some(9)), &m);
        assert_ne!(alert_key(&a), alert_key(&c));
    }

    #[test]
    fn path_invariants() {
        assert_eq!(normalize_path("./a/../b/c.c").unwrap(), PathBuf::from("b/c.c"));
        assert!(matches!(normalize_path("../x.c"), Err(AlertError::EscapingPath(_))));
        assert!(matches!(normalize_path("/abs/x.c"), Err(AlertError::EscapingPath(_))));
        assert!(matches!(normalize_path(""), Err(AlertError::EmptyPath)));
        assert_eq!(Alert::new(Tool::Generic, "c", "a.c", 0, None, "").unwrap_err(), AlertError::ZeroLine);
        assert_eq!(Alert::new(Tool::Generic, "c", "a.c", 1, Some(0), "").unwrap_err(), AlertError::ZeroColumn);
    }
}
