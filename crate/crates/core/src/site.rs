//! Resolves alerts to concrete repair sites and infers how a repaired
//! function should bail out when a guard fires.

use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::alert::Alert;
use crate::view::{SourceView, INTEGER_TYPEDEFS, INTEGER_WORDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueCategory {
    Rvalue,
    AddressableLvalue,
    NonAddressableLvalue,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("unresolvable site")]
    Unresolvable,
    #[error("macro-obscured site")]
    MacroObscured,
    #[error("ambiguous site")]
    Ambiguous,
    #[error("line {0} is outside the file")]
    LineOutOfRange(usize),
    #[error("unmapped alert")]
    Unmapped,
    #[error("no repair template for {0}")]
    UnsupportedGuideline(String),
}

/// Where an uninitialized variable was declared, if anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclLookup {
    Local(Declarator),
    Parameter,
    Extern,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    /// Name through any array suffix.
    pub range: Range<usize>,
    /// Name through the end of the init-declarator (next `,` or `;`).
    pub extent: Range<usize>,
    pub has_initializer: bool,
    pub zero: &'static str,
    pub is_register: bool,
    pub is_array: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SiteDetail {
    NullDeref,
    Uninit(DeclLookup),
    /// `x = CALL;` whose stored value is never read. `lhs` covers `x =` up
    /// to the first byte of the call.
    DeadAssignment { lhs: Range<usize> },
    /// Label and its colon, plus trailing blanks on the same line.
    UnusedLabel { delete: Range<usize>, referenced: bool },
    /// Statement already begins with a `(void)` cast.
    VoidCast,
    /// Label alert on a line that no longer has a label.
    LabelAbsent,
    OtherIneffective(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairSite {
    pub alert: Alert,
    pub stmt_range: Range<usize>,
    pub expr_range: Range<usize>,
    pub value_category: ValueCategory,
    pub decl_range: Option<Range<usize>>,
    pub variable: Option<String>,
    pub detail: SiteDetail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnClass {
    Integer,
    Pointer,
    EnumLike,
    Void,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnValue {
    None,
    Token(String),
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnStmt {
    pub range: Range<usize>,
    pub value: ReturnValue,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionContext {
    pub name: String,
    pub return_class: ReturnClass,
    pub body_range: Range<usize>,
    pub returns: Vec<ReturnStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorStrategy {
    ReturnValue(String),
    ReturnNull,
    ReturnVoid,
    Abort,
    Custom(String),
}

impl ErrorStrategy {
    /// The handler statement, without a trailing semicolon, as it appears
    /// in the second argument of a null-check macro.
    pub fn render(&self) -> String {
        match self {
            ErrorStrategy::ReturnValue(v) => format!("return {v}"),
            ErrorStrategy::ReturnNull => "return NULL".into(),
            ErrorStrategy::ReturnVoid => "return".into(),
            ErrorStrategy::Abort => "abort()".into(),
            ErrorStrategy::Custom(s) => {
                let s = s.replace(['\n', '\r'], " ");
                let s = s.trim().trim_end_matches(';').trim_end();
                if has_top_level_comma(s) {
                    format!("({s})")
                } else {
                    s.to_string()
                }
            }
        }
    }
}

impl fmt::Display for ErrorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn has_top_level_comma(s: &str) -> bool {
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in s.chars() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => quote = Some(c),
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => return true,
            _ => {}
        }
    }
    false
}

#[derive(Debug, Clone, Default)]
pub struct StrategyConfig {
    pub error_handler: Option<String>,
}

/// Picks the bail-out action for a guard in `f`. Rules are tried in order:
/// configured handler, integer error value, pointer null, void return,
/// and finally `abort()`.
pub fn infer_error_strategy(f: Option<&FunctionContext>, config: &StrategyConfig) -> ErrorStrategy {
    if let Some(h) = config.error_handler.as_ref().filter(|h| !h.trim().is_empty()) {
        return ErrorStrategy::Custom(h.clone());
    }
    let Some(f) = f else {
        return ErrorStrategy::Abort;
    };
    let final_ret = f.returns.iter().find(|r| r.is_final);
    let early = || f.returns.iter().filter(|r| !r.is_final);
    match f.return_class {
        ReturnClass::Integer => {
            if let Some(fin) = final_ret {
                if let Some(v) = early().find_map(|r| match &r.value {
                    ReturnValue::Token(v) if fin.value != r.value => Some(v.clone()),
                    _ => None,
                }) {
                    return ErrorStrategy::ReturnValue(v);
                }
            }
            ErrorStrategy::Abort
        }
        ReturnClass::Pointer => {
            let is_null = |v: &ReturnValue| matches!(v, ReturnValue::Token(t) if t == "NULL" || t == "0");
            match final_ret {
                Some(fin) if !is_null(&fin.value) && early().any(|r| is_null(&r.value)) => ErrorStrategy::ReturnNull,
                _ => ErrorStrategy::Abort,
            }
        }
        ReturnClass::Void => ErrorStrategy::ReturnVoid,
        ReturnClass::EnumLike | ReturnClass::Other => ErrorStrategy::Abort,
    }
}

fn strip_storage<'v>(view: &SourceView<'v>, toks: &[usize]) -> Vec<&'v str> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let k = toks[i];
        let t = view.text(k);
        if matches!(t, "__attribute__" | "__declspec") {
            // skip the parenthesized argument
            if let Some(&next) = toks.get(i + 1) {
                if let Some(close) = view.partner(next) {
                    while i < toks.len() && toks[i] <= close {
                        i += 1;
                    }
                    continue;
                }
            }
        }
        if !matches!(t, "static" | "extern" | "inline" | "__inline" | "__inline__" | "__extension__" | "_Noreturn" | "register" | "auto" | "const" | "volatile") {
            out.push(t);
        }
        i += 1;
    }
    out
}

fn typedef_enum_names(view: &SourceView<'_>) -> Vec<String> {
    let mut names = Vec::new();
    for k in 0..view.len() {
        if !(view.is(k, "typedef") && view.is(k + 1, "enum")) {
            continue;
        }
        let mut j = k + 2;
        while j < view.len() && !(view.is(j, ";") && view.brace_depth(j) == view.brace_depth(k)) {
            if view.is(j, "{") {
                j = view.partner(j).unwrap_or(j);
            }
            j += 1;
        }
        if j < view.len() && j > 0 && view.is_name(j - 1) {
            names.push(view.text(j - 1).to_string());
        }
    }
    names
}

/// Classifies a function's declared return type from its header tokens.
fn return_class(view: &SourceView<'_>, header: &[usize], enum_names: &[String]) -> ReturnClass {
    let words = strip_storage(view, header);
    if words.is_empty() {
        // implicit int
        return ReturnClass::Integer;
    }
    if words.contains(&"*") {
        return ReturnClass::Pointer;
    }
    if words.contains(&"enum") || words.iter().any(|w| enum_names.iter().any(|n| n == w)) {
        return ReturnClass::EnumLike;
    }
    if words == ["void"] {
        return ReturnClass::Void;
    }
    if words.iter().all(|w| INTEGER_WORDS.contains(w) || INTEGER_TYPEDEFS.contains(w)) {
        return ReturnClass::Integer;
    }
    ReturnClass::Other
}

fn return_value(view: &SourceView<'_>, first: usize, last_excl: usize) -> ReturnValue {
    let (mut a, mut b) = (first, last_excl);
    while b > a + 1 && view.is(a, "(") && view.partner(a) == Some(b - 1) {
        a += 1;
        b -= 1;
    }
    match b - a {
        0 => ReturnValue::None,
        1 if view.is_name(a) || view.is_literal(a) => ReturnValue::Token(view.text(a).to_string()),
        2 if view.is(a, "-") && view.kind(a + 1) == crate::scan::TokenKind::Number => {
            ReturnValue::Token(format!("-{}", view.text(a + 1)))
        }
        _ => ReturnValue::Complex,
    }
}

/// Token position of `{` for every top-level function body in the file,
/// with its parsed header.
fn function_at(view: &SourceView<'_>, open: usize, enum_names: &[String]) -> Option<FunctionContext> {
    let close = view.partner(open)?;
    let mut prev = open.checked_sub(1)?;
    let mut kr = false;
    if view.is(prev, ";") {
        // K&R parameter declarations between `)` and `{`
        let mut j = prev;
        while j > 0 && !view.is(j, ")") {
            if view.is(j, "{") || view.is(j, "}") || view.is(j, "=") {
                return None;
            }
            j -= 1;
        }
        if !view.is(j, ")") {
            return None;
        }
        prev = j;
        kr = true;
    }
    if view.is(prev, ")") {
        let mut popen = view.partner(prev)?;
        // `f(...) __attribute__((...)) {`
        if popen >= 2 && view.is(popen - 1, "__attribute__") && view.is(popen - 2, ")") {
            popen = view.partner(popen - 2)?;
        }
        let name_pos = popen.checked_sub(1)?;
        let mut start = name_pos;
        while start > 0 {
            let p = start - 1;
            // a `}` carries the depth inside its block
            let top_close = view.is(p, "}") && view.partner(p).is_some_and(|o| view.brace_depth(o) == 0);
            if (view.brace_depth(p) == 0 && view.is(p, ";")) || top_close {
                break;
            }
            start = p;
        }
        let plain_name = view.is_name(name_pos);
        let header: Vec<usize> = (start..name_pos).collect();
        let return_class = if kr || !plain_name || header.iter().any(|&k| view.is(k, "(") || view.is(k, ")")) {
            ReturnClass::Other
        } else {
            return_class(view, &header, enum_names)
        };
        let mut returns = Vec::new();
        let mut k = open + 1;
        while k < close {
            if view.is(k, "return") {
                let mut e = k + 1;
                while e < close && !(view.is(e, ";") && view.paren_depth(e) == view.paren_depth(k)) {
                    e += 1;
                }
                let value = return_value(view, k + 1, e.min(close));
                returns.push(ReturnStmt { range: view.span(k, e.min(close)), value, is_final: false });
                k = e;
            }
            k += 1;
        }
        if let Some(last) = returns.last_mut() {
            last.is_final = true;
        }
        return Some(FunctionContext {
            name: view.text(name_pos).to_string(),
            return_class,
            body_range: view.span(open, close),
            returns,
        });
    }
    None
}

/// All top-level function bodies.
pub fn functions(view: &SourceView<'_>) -> Vec<FunctionContext> {
    let enum_names = typedef_enum_names(view);
    (0..view.len())
        .filter(|&k| view.is(k, "{") && view.brace_depth(k) == 0)
        .filter_map(|k| function_at(view, k, &enum_names))
        .collect()
}

/// The function whose body contains `offset`, or `None` at file scope.
pub fn enclosing_function(view: &SourceView<'_>, offset: usize) -> Option<FunctionContext> {
    functions(view).into_iter().find(|f| f.body_range.start < offset && offset < f.body_range.end)
}

fn is_prefix_op(view: &SourceView<'_>, k: usize) -> bool {
    matches!(view.text(k), "*" | "&" | "-" | "+" | "!" | "~" | "++" | "--")
}

/// Start of the postfix expression that ends at token `end`.
fn postfix_start(view: &SourceView<'_>, end: usize) -> Option<usize> {
    let mut i = end;
    loop {
        let s = if view.is(i, "]") {
            let open = view.partner(i)?;
            i = open.checked_sub(1)?;
            continue;
        } else if view.is(i, ")") {
            let open = view.partner(i)?;
            if open > 0 && view.is_name(open - 1) {
                open - 1
            } else {
                open
            }
        } else if view.is_name(i) || view.is_literal(i) {
            i
        } else {
            return None;
        };
        if s >= 2 && (view.is(s - 1, ".") || view.is(s - 1, "->")) {
            i = s - 2;
            continue;
        }
        return Some(s);
    }
}

fn looks_like_type(view: &SourceView<'_>, open: usize, close: usize) -> bool {
    if close <= open + 1 {
        return false;
    }
    let first = open + 1;
    if view.is_type_word(first) {
        return true;
    }
    let all_typeish = (first..close).all(|k| view.is_name(k) || view.is(k, "*") || view.is_type_word(k));
    all_typeish && (view.is(close - 1, "*") || (close == first + 1 && view.text(first).ends_with("_t")))
}

/// Parses a unary expression starting at `q`. Returns (last token of the
/// full expression, last token of the expression before any postfix
/// `++`/`--`).
fn unary_extent(view: &SourceView<'_>, q: usize) -> Option<(usize, usize)> {
    if q >= view.len() {
        return None;
    }
    if is_prefix_op(view, q) {
        let (e, _) = unary_extent(view, q + 1)?;
        return Some((e, e));
    }
    let mut pe = if view.is(q, "(") {
        let close = view.partner(q)?;
        if looks_like_type(view, q, close) && close + 1 < view.len() {
            if let Some((e, _)) = unary_extent(view, close + 1) {
                return Some((e, e));
            }
        }
        close
    } else if view.is_name(q) || view.is_literal(q) {
        q
    } else {
        return None;
    };
    loop {
        let n = pe + 1;
        if n >= view.len() {
            return Some((pe, pe));
        }
        if view.is(n, "[") || view.is(n, "(") {
            pe = view.partner(n)?;
        } else if (view.is(n, ".") || view.is(n, "->")) && view.is_name(n + 1) {
            pe = n + 1;
        } else if view.is(n, "++") || view.is(n, "--") {
            return Some((n, pe));
        } else {
            return Some((pe, pe));
        }
    }
}

/// Whether the `*` at `k` is a unary dereference (not multiplication, not
/// part of a declarator).
fn star_is_deref(view: &SourceView<'_>, k: usize) -> bool {
    let mut p = k;
    while p > 0 {
        p -= 1;
        if view.is(p, "*") || matches!(view.text(p), "const" | "volatile" | "restrict" | "__restrict") {
            continue;
        }
        if p + 1 == k {
            // immediately preceding token
            if view.is_name(p) || view.is_literal(p) || matches!(view.text(p), ")" | "]" | "++" | "--") {
                return false;
            }
        }
        if view.is_type_word(p) || view.is_name(p) {
            return false;
        }
        return view.text(p) != "sizeof";
    }
    true
}

/// Whether the identifier at `k` names the object being declared.
pub fn is_declarator_name(view: &SourceView<'_>, k: usize) -> bool {
    if !view.is_name(k) {
        return false;
    }
    let mut p = k;
    while p > 0 && (view.is(p - 1, "*") || matches!(view.text(p - 1), "const" | "volatile" | "restrict" | "__restrict")) {
        p -= 1;
    }
    if p == 0 {
        return false;
    }
    let before = p - 1;
    if view.is_type_word(before) {
        return !view.is(before, "struct") && !view.is(before, "union") && !view.is(before, "enum") || p < k;
    }
    if view.is_name(before) {
        // `T x` or `struct tag x`
        if before > 0 && matches!(view.text(before - 1), "struct" | "union" | "enum") {
            return true;
        }
        return before == 0 || is_type_position(view, before);
    }
    if view.is(before, ",") {
        let (s, _) = declaration_start(view, before);
        return s.is_some_and(|s| starts_declaration(view, s));
    }
    false
}

/// A typedef name at `k`: it begins a statement or follows specifiers.
fn is_type_position(view: &SourceView<'_>, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    let p = k - 1;
    view.is(p, ";") || view.is(p, "{") || view.is(p, "}") || view.is(p, "(") && view.is(p.wrapping_sub(1), "for")
        || view.is(p, ",") && view.paren_depth(p) > 0 || view.is_type_word(p) || view.is(p, "(")
}

/// Token position where the declaration containing `k` begins, walking
/// back to a statement boundary at the same paren depth.
fn declaration_start(view: &SourceView<'_>, k: usize) -> (Option<usize>, u32) {
    let depth = view.paren_depth(k);
    let mut j = k;
    while j > 0 {
        let p = j - 1;
        if view.paren_depth(p) < depth || (view.paren_depth(p) == depth && matches!(view.text(p), ";" | "{" | "}")) {
            return (Some(j), depth);
        }
        if view.is(p, "=") && view.paren_depth(p) == depth && false {
            return (None, depth);
        }
        j = p;
    }
    (Some(0), depth)
}

fn starts_declaration(view: &SourceView<'_>, s: usize) -> bool {
    if s >= view.len() {
        return false;
    }
    if view.is_type_word(s) {
        return true;
    }
    view.is_name(s)
        && (view.is_name(s + 1) || view.is(s + 1, "*") && view.is_name(s + 2) && !view.is(s + 3, "=") || INTEGER_TYPEDEFS.contains(&view.text(s)))
}

/// Zero value for a declarator whose specifiers are `specs`.
fn zero_for(view: &SourceView<'_>, specs: &[usize], pointer: bool, array: bool) -> &'static str {
    if array {
        return "{0}";
    }
    if pointer {
        return "0";
    }
    let words: Vec<&str> = specs.iter().map(|&k| view.text(k)).collect();
    if words.contains(&"float") {
        return "0.0f";
    }
    if words.contains(&"double") {
        return "0.0";
    }
    if words.contains(&"struct") || words.contains(&"union") {
        return "{0}";
    }
    if words.contains(&"enum") {
        return "0";
    }
    let type_words: Vec<&&str> = words
        .iter()
        .filter(|w| !matches!(**w, "static" | "register" | "auto" | "const" | "volatile" | "_Thread_local"))
        .collect();
    if !type_words.is_empty() && type_words.iter().all(|w| INTEGER_WORDS.contains(w) || INTEGER_TYPEDEFS.contains(w)) {
        return "0";
    }
    "{0}"
}

fn declarator_at(view: &SourceView<'_>, name: usize) -> Option<DeclLookup> {
    let (start, depth) = declaration_start(view, name);
    let start = start?;
    if !starts_declaration(view, start) {
        return None;
    }
    let mut spec_end = start;
    while spec_end < name && (view.is_type_word(spec_end) || view.is_name(spec_end) && !is_declarator_name(view, spec_end)) {
        spec_end += 1;
        if spec_end > 0 && matches!(view.text(spec_end - 1), "struct" | "union" | "enum") && view.is(spec_end, "{") {
            spec_end = view.partner(spec_end)? + 1;
        }
    }
    let specs: Vec<usize> = (start..spec_end).collect();
    if specs.iter().any(|&k| view.is(k, "extern")) {
        return Some(DeclLookup::Extern);
    }
    if specs.iter().any(|&k| view.is(k, "typedef")) {
        return None;
    }
    let pointer = name > 0 && view.is(name - 1, "*");
    let mut end = name;
    let mut array = false;
    while view.is(end + 1, "[") {
        end = view.partner(end + 1)?;
        array = true;
    }
    if view.is(end + 1, "(") || view.is(end + 1, ":") {
        return None;
    }
    let has_initializer = view.is(end + 1, "=");
    let mut ext = end;
    while ext + 1 < view.len() {
        let n = ext + 1;
        if view.paren_depth(n) == depth && matches!(view.text(n), "," | ";") || view.paren_depth(n) < depth {
            break;
        }
        if matches!(view.text(n), "{" | "}") && view.paren_depth(n) == depth && !has_initializer {
            break;
        }
        ext = n;
    }
    Some(DeclLookup::Local(Declarator {
        range: view.span(name, end),
        extent: view.span(name, ext),
        has_initializer,
        zero: zero_for(view, &specs, pointer, array),
        is_register: specs.iter().any(|&k| view.is(k, "register")),
        is_array: array,
    }))
}

/// Walks backwards from `use_pos` through the enclosing blocks looking for
/// the declaration of `name`. Sibling blocks that already closed are
/// skipped; the search ends at the function's parameter list.
pub fn find_declaration(view: &SourceView<'_>, use_pos: usize, name: &str) -> DeclLookup {
    let mut j = use_pos;
    while j > 0 {
        j -= 1;
        if view.is(j, "}") {
            match view.partner(j) {
                Some(open) => {
                    j = open;
                    continue;
                }
                None => return DeclLookup::NotFound,
            }
        }
        if view.is(j, "{") && view.brace_depth(j) == 0 {
            // function body: check the parameter list, then stop
            let mut p = j;
            while p > 0 && !view.is(p - 1, ")") && !view.is(p - 1, "}") && !view.is(p - 1, ";") {
                p -= 1;
            }
            if p > 0 && view.is(p - 1, ")") {
                if let Some(open) = view.partner(p - 1) {
                    if (open..p).any(|k| view.is(k, name) && view.is_name(k)) {
                        return DeclLookup::Parameter;
                    }
                }
            } else if p > 0 && view.is(p - 1, ";") {
                // K&R declarations between `)` and `{`
                if (p.saturating_sub(64)..j).any(|k| view.is(k, name)) {
                    return DeclLookup::Parameter;
                }
            }
            return DeclLookup::NotFound;
        }
        if view.is(j, name) && is_declarator_name(view, j) {
            if let Some(found) = declarator_at(view, j) {
                return found;
            }
        }
    }
    DeclLookup::NotFound
}

fn is_bitfield_member(view: &SourceView<'_>, member: &str) -> bool {
    (0..view.len()).any(|k| {
        view.is(k, member)
            && view.is(k + 1, ":")
            && view.kind(k + 2) == crate::scan::TokenKind::Number
            && (view.is(k + 3, ";") || view.is(k + 3, ","))
            && view.brace_depth(k) > 0
            && k > 0
            && !view.is(k - 1, "case")
    })
}

/// Value category of the expression spanning tokens `first..=last`.
pub fn value_category_of(view: &SourceView<'_>, first: usize, last: usize) -> ValueCategory {
    let next = last + 1;
    let follows_postfix = next < view.len() && matches!(view.text(next), "->" | "." | "[" | "(");
    let post = next < view.len()
        && matches!(view.text(next), "++" | "--" | "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=");
    let pre = first > 0
        && !follows_postfix
        && (matches!(view.text(first - 1), "++" | "--")
            || view.is(first - 1, "&") && (first == 1 || !(view.is_name(first - 2) || view.is_literal(first - 2) || matches!(view.text(first - 2), ")" | "]"))));
    if !(post || pre) {
        return ValueCategory::Rvalue;
    }
    // identifier or member/subscript chain
    let chain_ok = postfix_start(view, last) == Some(first)
        && !(first..=last).any(|k| view.is(k, "(") && k > first && view.is_name(k - 1));
    if !chain_ok {
        return ValueCategory::NonAddressableLvalue;
    }
    if last > first && (view.is(last - 1, ".") || view.is(last - 1, "->")) && is_bitfield_member(view, view.text(last)) {
        return ValueCategory::NonAddressableLvalue;
    }
    if first == last {
        if let DeclLookup::Local(d) = find_declaration(view, first, view.text(first)) {
            if d.is_register {
                return ValueCategory::NonAddressableLvalue;
            }
        }
    }
    ValueCategory::AddressableLvalue
}

/// Value category of the expression occupying `expr_range`.
pub fn value_category(view: &SourceView<'_>, expr_range: Range<usize>) -> ValueCategory {
    match token_span(view, &expr_range) {
        Some((a, b)) => value_category_of(view, a, b),
        None => ValueCategory::Rvalue,
    }
}

fn token_span(view: &SourceView<'_>, range: &Range<usize>) -> Option<(usize, usize)> {
    let a = view.token_at_or_after(range.start)?;
    let mut b = a;
    while b + 1 < view.len() && view.range(b + 1).end <= range.end {
        b += 1;
    }
    (view.range(a).start >= range.start && view.range(b).end <= range.end).then_some((a, b))
}

#[derive(Debug, Clone, Copy)]
struct Deref {
    /// Operator token (`*`, `->`, `[`) or the callee for argument targets.
    op: usize,
    first: usize,
    last: usize,
}

impl Deref {
    fn span(&self) -> (usize, usize) {
        (self.op.min(self.first), self.op.max(self.last))
    }
}

fn derefs_in(view: &SourceView<'_>, from: usize, to: usize) -> Vec<Deref> {
    let mut out = Vec::new();
    for k in from..=to.min(view.len().saturating_sub(1)) {
        match view.text(k) {
            "*" if star_is_deref(view, k) => {
                if let Some((_, target_end)) = unary_extent(view, k + 1) {
                    out.push(Deref { op: k, first: k + 1, last: target_end });
                }
            }
            "->" if k > 0 => {
                if let Some(s) = postfix_start(view, k - 1) {
                    out.push(Deref { op: k, first: s, last: k - 1 });
                }
            }
            "[" if k > 0 && (view.is_name(k - 1) || matches!(view.text(k - 1), ")" | "]") || view.kind(k - 1) == crate::scan::TokenKind::String) => {
                if view.is_name(k - 1) && is_declarator_name(view, k - 1) {
                    continue;
                }
                if let Some(s) = postfix_start(view, k - 1) {
                    out.push(Deref { op: k, first: s, last: k - 1 });
                }
            }
            _ => {}
        }
    }
    out
}

/// Top-level arguments of the call whose `(` is at `open`, as inclusive
/// token spans.
fn call_arguments(view: &SourceView<'_>, open: usize) -> Vec<(usize, usize)> {
    let Some(close) = view.partner(open) else {
        return Vec::new();
    };
    let mut args = Vec::new();
    let mut start = open + 1;
    let mut k = open + 1;
    while k < close {
        if view.is(k, "(") || view.is(k, "[") || view.is(k, "{") {
            k = view.partner(k).unwrap_or(k);
        } else if view.is(k, ",") {
            if k > start {
                args.push((start, k - 1));
            }
            start = k + 1;
        }
        k += 1;
    }
    if close > start {
        args.push((start, close - 1));
    }
    args
}

fn ordinal_argument(message: &str) -> Option<usize> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(\d+)(?:st|nd|rd|th) (?:parameter|argument|function call argument)").unwrap());
    re.captures(message).and_then(|c| c[1].parse().ok())
}

fn message_variable(message: &str) -> Option<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"(?:[Vv]ariable:?\s+'?([A-Za-z_][A-Za-z0-9_]*)'?|'([A-Za-z_][A-Za-z0-9_]*)'|\b([A-Za-z_][A-Za-z0-9_]*) is used uninitialized)").unwrap()
    });
    re.captures(message)
        .and_then(|c| c.get(1).or(c.get(2)).or(c.get(3)))
        .map(|m| m.as_str().to_string())
}

/// The pointer an analyzer says was null: `loaded from field 'next'`, or
/// Cppcheck's `dereference: n->next`.
fn pointer_hint(message: &str) -> Option<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"loaded from (?:variable|field) '([^']+)'|[Dd]ereference: (\S+?)\.?$").unwrap());
    re.captures(message).and_then(|c| c.get(1).or(c.get(2))).map(|m| m.as_str().to_string())
}

fn matches_hint(view: &SourceView<'_>, d: &Deref, hint: &str) -> bool {
    let text: String = view.slice(view.span(d.first, d.last)).split_whitespace().collect();
    text == hint || view.text(d.last) == hint
}

/// Anchors an alert to a code token on its line.
fn anchor(view: &SourceView<'_>, alert: &Alert) -> Result<(usize, bool), SiteError> {
    let line = view.line_range(alert.line).ok_or(SiteError::LineOutOfRange(alert.line))?;
    let on_line = view.tokens_on_line(alert.line);
    if on_line.is_empty() {
        // a statement continuing from a previous line
        if let Some(k) = view.token_at_or_after(line.start) {
            if view.range(k).start < line.end {
                return Ok((k, false));
            }
        }
        return Err(SiteError::Unresolvable);
    }
    let Some(col) = alert.column else {
        return Ok((on_line.start, false));
    };
    let offset = (line.start + col - 1).min(line.end);
    let best = on_line
        .clone()
        .min_by_key(|&k| {
            let r = view.range(k);
            if r.start <= offset && offset < r.end {
                0
            } else if offset < r.start {
                r.start - offset
            } else {
                offset + 1 - r.end
            }
        })
        .ok_or(SiteError::Unresolvable)?;
    Ok((best, true))
}

fn is_macro_name(view: &SourceView<'_>, k: usize) -> bool {
    let t = view.text(k);
    view.is_name(k) && t.len() > 1 && t.bytes().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == b'_')
}

fn inside_macro_call(view: &SourceView<'_>, k: usize) -> bool {
    if is_macro_name(view, k) && view.is(k + 1, "(") {
        return true;
    }
    let mut p = k;
    while p > 0 {
        p -= 1;
        if view.is(p, "(") {
            if let Some(close) = view.partner(p) {
                if close >= k && p > 0 && is_macro_name(view, p - 1) {
                    return true;
                }
            }
        }
        if view.is(p, ";") || view.is(p, "{") || view.is(p, "}") {
            return false;
        }
    }
    false
}

fn locate_null_deref(view: &SourceView<'_>, alert: &Alert, k: usize, has_col: bool) -> Result<(usize, usize, usize), SiteError> {
    let line = alert.line;
    let (s, e) = view.statement_bounds(k);
    let on_line = |d: &Deref| view.line_of(d.op) == line || view.line_of(d.first) == line || view.line_of(d.last) == line;
    if !has_col {
        let lr = view.tokens_on_line(line);
        let (from, to) = if lr.is_empty() { (s, e) } else { (view.statement_bounds(lr.start).0, view.statement_bounds(lr.end - 1).1) };
        let cands: Vec<Deref> = derefs_in(view, from, to).into_iter().filter(on_line).collect();
        let mut texts: Vec<String> = cands.iter().map(|d| view.slice(view.span(d.first, d.last))).collect();
        texts.sort();
        texts.dedup();
        return match (cands.first(), texts.len()) {
            (Some(d), 1) => Ok((d.op, d.first, d.last)),
            (Some(_), _) => Err(SiteError::Ambiguous),
            (None, _) => argument_target(view, alert, k).ok_or_else(|| no_site(view, k)),
        };
    }
    let mut cands: Vec<Deref> = derefs_in(view, s, e).into_iter().filter(on_line).collect();
    if let Some(h) = pointer_hint(&alert.message) {
        let named: Vec<Deref> = cands.iter().copied().filter(|d| matches_hint(view, d, &h)).collect();
        if !named.is_empty() {
            cands = named;
        }
    }
    let containing = cands
        .iter()
        .filter(|d| {
            let (a, b) = d.span();
            a <= k && k <= b
        })
        .min_by_key(|d| {
            let (a, b) = d.span();
            (view.range(b).end - view.range(a).start, d.first)
        });
    if let Some(d) = containing {
        // an argument alert on a callee name outranks derefs inside the call
        if let Some(arg) = argument_target(view, alert, k) {
            return Ok(arg);
        }
        return Ok((d.op, d.first, d.last));
    }
    if let Some(arg) = argument_target(view, alert, k) {
        return Ok(arg);
    }
    let anchor_start = view.range(k).start;
    let nearest = cands.iter().min_by_key(|d| {
        let (a, b) = d.span();
        let r = view.span(a, b);
        if anchor_start < r.start { r.start - anchor_start } else { anchor_start.saturating_sub(r.end) }
    });
    nearest.map(|d| (d.op, d.first, d.last)).ok_or_else(|| no_site(view, k))
}

fn no_site(view: &SourceView<'_>, k: usize) -> SiteError {
    if inside_macro_call(view, k) {
        SiteError::MacroObscured
    } else {
        SiteError::Unresolvable
    }
}

/// Null argument passed to a function: the alert names an argument by
/// ordinal, or points straight at a whole argument.
fn argument_target(view: &SourceView<'_>, alert: &Alert, k: usize) -> Option<(usize, usize, usize)> {
    if let Some(n) = ordinal_argument(&alert.message) {
        // callee at or after the anchor on the same statement
        let (_, e) = view.statement_bounds(k);
        let mut c = k;
        while c < e {
            if view.is_name(c) && view.is(c + 1, "(") && !view.is_keyword(c) {
                let args = call_arguments(view, c + 1);
                return args.get(n.checked_sub(1)?).map(|&(a, b)| (c, a, b));
            }
            c += 1;
        }
        return None;
    }
    // anchor is an argument by itself: `strlen(s)`
    let mut p = k;
    while p > 0 && !matches!(view.text(p - 1), "(" | ",") {
        if matches!(view.text(p - 1), ";" | "{" | "}") {
            return None;
        }
        p -= 1;
    }
    let open = {
        let mut o = p.checked_sub(1)?;
        while view.is(o, ",") || view.partner(o).is_none() || view.partner(o)? < k {
            if view.is(o, ")") || view.is(o, "]") {
                o = view.partner(o)?;
            }
            o = o.checked_sub(1)?;
            if view.is(o, ";") || view.is(o, "{") || view.is(o, "}") {
                return None;
            }
        }
        o
    };
    if !view.is(open, "(") || open == 0 || !view.is_name(open - 1) || is_macro_name(view, open - 1) {
        return None;
    }
    call_arguments(view, open)
        .into_iter()
        .find(|&(a, b)| a <= k && k <= b && (a == b || postfix_start(view, b) == Some(a)))
        .map(|(a, b)| (open - 1, a, b))
}

fn locate_uninit(view: &SourceView<'_>, alert: &Alert, k: usize, has_col: bool) -> Result<(usize, String, DeclLookup), SiteError> {
    let lr = view.tokens_on_line(alert.line);
    let candidates: Vec<usize> = if lr.is_empty() { vec![k] } else { lr.collect() };
    let hint = message_variable(&alert.message);
    let mut names: Vec<usize> = candidates.iter().copied().filter(|&c| view.is_name(c) && !view.is(c + 1, "(")).collect();
    if let Some(h) = &hint {
        let named: Vec<usize> = names.iter().copied().filter(|&c| view.text(c) == h).collect();
        if named.is_empty() {
            // the use is elsewhere (e.g. reported at a branch condition)
            let lookup = find_declaration(view, k, h);
            if lookup != DeclLookup::NotFound {
                return Ok((k, h.clone(), lookup));
            }
        } else {
            names = named;
        }
    }
    if has_col {
        let at = view.range(k).start;
        names.sort_by_key(|&c| (view.range(c).start.abs_diff(at), c));
    }
    let mut fallback = None;
    for &c in &names {
        let lookup = find_declaration(view, c, view.text(c));
        match lookup {
            DeclLookup::Local(_) => return Ok((c, view.text(c).to_string(), lookup)),
            _ if fallback.is_none() => fallback = Some((c, view.text(c).to_string(), lookup)),
            _ => {}
        }
    }
    fallback.ok_or_else(|| no_site(view, k))
}

/// Skips statement prefixes (`if (...)`, `else`, labels) to the simple
/// statement inside.
fn simple_statement_start(view: &SourceView<'_>, mut s: usize, e: usize) -> usize {
    loop {
        if s >= e {
            return s;
        }
        match view.text(s) {
            "else" | "do" => s += 1,
            "if" | "while" | "for" | "switch" if view.is(s + 1, "(") => match view.partner(s + 1) {
                Some(close) => s = close + 1,
                None => return s,
            },
            "case" => {
                while s < e && !view.is(s, ":") {
                    s += 1;
                }
                s += 1;
            }
            "default" if view.is(s + 1, ":") => s += 2,
            _ if view.is_name(s) && view.is(s + 1, ":") && !view.is(s + 2, ":") => s += 2,
            _ => return s,
        }
    }
}

fn locate_ineffective(view: &SourceView<'_>, alert: &Alert, k: usize) -> (usize, usize, SiteDetail) {
    let lr = view.tokens_on_line(alert.line);
    let hint = message_variable(&alert.message);
    let wants_label = alert.checker_id.to_ascii_lowercase().contains("label") || alert.message.contains("Label");
    let line_tokens: Vec<usize> = if lr.is_empty() { vec![k] } else { lr.collect() };

    // unused label
    for &c in &line_tokens {
        let is_label = view.is_name(c)
            && view.is(c + 1, ":")
            && !view.is(c + 2, ":")
            && !(c > 0 && (view.is(c - 1, "?") || view.is(c - 1, "case") || view.is(c - 1, "goto")))
            && (c == 0 || matches!(view.text(c - 1), ";" | "{" | "}" | ":" | ")") || view.is(c - 1, "else"))
            && view.brace_depth(c) > 0
            && view.paren_depth(c) == 0;
        if !is_label || hint.as_deref().is_some_and(|h| h != view.text(c)) && !wants_label {
            continue;
        }
        if !wants_label && hint.is_some() && hint.as_deref() != Some(view.text(c)) {
            continue;
        }
        let name = view.text(c);
        let referenced = (0..view.len()).any(|g| view.is(g, "goto") && view.is(g + 1, name)) || (0..view.len()).any(|g| view.is(g, "&&") && view.is(g + 1, name));
        let colon_end = view.range(c + 1).end;
        let mut end = colon_end;
        while end < view.src.len() && matches!(view.src[end], b' ' | b'\t') {
            end += 1;
        }
        let delete = view.range(c).start..end;
        return (c, c + 1, SiteDetail::UnusedLabel { delete, referenced });
    }

    // `x = CALL;`
    let mut seen = Vec::new();
    for &c in &line_tokens {
        let (s, e) = view.statement_bounds(c);
        if seen.contains(&s) {
            continue;
        }
        seen.push(s);
        let ss = simple_statement_start(view, s, e);
        if view.is_name(ss) && view.is(ss + 1, "=") && view.is(e, ";") {
            if hint.as_deref().is_some_and(|h| h != view.text(ss)) {
                continue;
            }
            let rhs = ss + 2;
            let rhs_last = e - 1;
            let is_call = rhs < rhs_last
                && view.is(rhs_last, ")")
                && view.partner(rhs_last).is_some_and(|open| open > rhs && view.is_name(open - 1) && postfix_start(view, rhs_last) == Some(rhs));
            if !is_call {
                return (ss, e - 1, SiteDetail::OtherIneffective("assigned value is not a call"));
            }
            let lhs = view.range(ss).start..view.range(rhs).start;
            return (ss, e - 1, SiteDetail::DeadAssignment { lhs });
        }
        if view.is(ss, "(") && view.is(ss + 1, "void") && view.is(ss + 2, ")") {
            return (ss, e, SiteDetail::VoidCast);
        }
    }
    if wants_label {
        return (k, k, SiteDetail::LabelAbsent);
    }
    let (s, e) = view.statement_bounds(k);
    let unsigned_cmp = (s..=e).any(|c| (view.is(c, "<") && view.is(c + 1, "0")) || (view.is(c, ">=") && view.is(c + 1, "0")));
    let reason = if unsigned_cmp { "comparison of unsigned value against zero" } else { "unsupported MSC12-C form" };
    (k, k, SiteDetail::OtherIneffective(reason))
}

/// Resolves `alert` to a repair site in `view`.
pub fn locate_site(view: &SourceView<'_>, alert: &Alert) -> Result<RepairSite, SiteError> {
    let guideline = alert.guideline.as_ref().ok_or(SiteError::Unmapped)?;
    if !guideline.is_repairable() {
        return Err(SiteError::UnsupportedGuideline(guideline.to_string()));
    }
    let (k, has_col) = anchor(view, alert)?;
    let (s, e) = view.statement_bounds(k);
    match guideline.as_str() {
        "EXP34-C" => {
            let (op, first, last) = locate_null_deref(view, alert, k, has_col)?;
            let (ss, se) = view.statement_bounds(op.min(first));
            let (ss, se) = (ss.min(first), se.max(last));
            Ok(RepairSite {
                alert: alert.clone(),
                stmt_range: view.span(ss, se),
                expr_range: view.span(first, last),
                value_category: value_category_of(view, first, last),
                decl_range: None,
                variable: (first == last && view.is_name(first)).then(|| view.text(first).to_string()),
                detail: SiteDetail::NullDeref,
            })
        }
        "EXP33-C" => {
            let (use_pos, name, lookup) = locate_uninit(view, alert, k, has_col)?;
            let (ss, se) = view.statement_bounds(use_pos);
            let decl_range = match &lookup {
                DeclLookup::Local(d) => Some(d.range.clone()),
                _ => None,
            };
            let expr_range = match &lookup {
                DeclLookup::Local(d) if view.text(use_pos) != name => d.range.clone(),
                _ => view.range(use_pos),
            };
            Ok(RepairSite {
                alert: alert.clone(),
                stmt_range: view.span(ss, se),
                expr_range,
                value_category: value_category_of(view, use_pos, use_pos),
                decl_range,
                variable: Some(name),
                detail: SiteDetail::Uninit(lookup),
            })
        }
        _ => {
            let (first, last, detail) = locate_ineffective(view, alert, k);
            let (ss, se) = view.statement_bounds(first);
            let _ = (s, e);
            Ok(RepairSite {
                alert: alert.clone(),
                stmt_range: view.span(ss.min(first), se.max(last)),
                expr_range: view.span(first, last),
                value_category: ValueCategory::Rvalue,
                decl_range: None,
                variable: view.is_name(first).then(|| view.text(first).to_string()),
                detail,
            })
        }
    }
}
