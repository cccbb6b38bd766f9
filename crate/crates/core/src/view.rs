//! Token-structure view shared by the site analyzer and the repair engine.
//!
//! Only code tokens are kept (trivia and directive lines are dropped).
//! Brackets are matched as if the first branch of every conditional group
//! were the active configuration: at `#else`/`#elif` the bracket stack is
//! rewound to its state at the group's `#if`, and at `#endif` the state at
//! the end of the first branch is restored.

use std::ops::Range;

use crate::scan::{
    directive_name, directives_from_tokens, scan_tokens, DirectiveRegion, ScanError, Token, TokenKind,
};

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum",
    "extern", "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return",
    "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void",
    "volatile", "while", "_Bool", "_Complex", "_Alignas", "_Alignof", "_Atomic", "_Generic",
    "_Noreturn", "_Static_assert", "_Thread_local", "__typeof__", "typeof", "asm", "__asm__",
    "__attribute__", "__extension__", "__inline", "__inline__", "__restrict", "bool",
];

/// Keywords that can begin or continue a declaration's specifiers.
pub const TYPE_WORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool", "bool",
    "_Complex", "const", "volatile", "restrict", "__restrict", "struct", "union", "enum", "static",
    "extern", "register", "auto", "inline", "__inline", "__inline__", "_Thread_local", "_Atomic",
    "typedef",
];

/// Integer typedefs common enough to treat as integer return/declaration types.
pub const INTEGER_TYPEDEFS: &[&str] = &[
    "size_t", "ssize_t", "ptrdiff_t", "intptr_t", "uintptr_t", "off_t", "pid_t", "int8_t", "int16_t",
    "int32_t", "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t", "intmax_t", "uintmax_t",
    "wchar_t",
];

pub const INTEGER_WORDS: &[&str] = &["char", "short", "int", "long", "signed", "unsigned", "_Bool", "bool"];

#[derive(Clone)]
struct BracketState {
    stack: Vec<usize>,
}

pub struct SourceView<'a> {
    pub src: &'a [u8],
    pub tokens: Vec<Token>,
    pub directives: Vec<DirectiveRegion>,
    /// Indices into `tokens` of code tokens.
    sig: Vec<usize>,
    partner: Vec<Option<usize>>,
    paren_depth: Vec<u32>,
    /// Paren depth at the innermost enclosing `{`, per code token.
    block_base: Vec<u32>,
    brace_depth: Vec<u32>,
    line_starts: Vec<usize>,
}

impl<'a> SourceView<'a> {
    pub fn new(src: &'a [u8]) -> Result<Self, ScanError> {
        let tokens = scan_tokens(src)?;
        let directives = directives_from_tokens(src, &tokens)?;
        let mut sig = Vec::new();
        let mut partner = Vec::new();
        let mut paren_depth = Vec::new();
        let mut block_base = Vec::new();
        let mut brace_depth = Vec::new();
        let mut state = BracketState { stack: Vec::new() };
        // (state at #if, state at end of first branch)
        let mut cond: Vec<(BracketState, Option<BracketState>)> = Vec::new();
        for (ti, tok) in tokens.iter().enumerate() {
            match tok.kind {
                TokenKind::Whitespace | TokenKind::Comment => continue,
                TokenKind::DirectiveLine => {
                    match directive_name(tok.text(src)) {
                        b"if" | b"ifdef" | b"ifndef" => cond.push((state.clone(), None)),
                        b"elif" | b"elifdef" | b"elifndef" | b"else" => {
                            if let Some((start, first)) = cond.last_mut() {
                                if first.is_none() {
                                    *first = Some(state.clone());
                                }
                                state = start.clone();
                            }
                        }
                        b"endif" => {
                            if let Some((_, Some(first))) = cond.pop() {
                                state = first;
                            }
                        }
                        _ => {}
                    }
                    continue;
                }
                _ => {}
            }
            let k = sig.len();
            sig.push(ti);
            partner.push(None);
            let text = tok.text(src);
            let parens = |stack: &[usize], sig: &[usize]| {
                stack.iter().filter(|&&o| matches!(tokens[sig[o]].text(src), b"(" | b"[")).count() as u32
            };
            let braces = |stack: &[usize], sig: &[usize]| {
                stack.iter().filter(|&&o| tokens[sig[o]].text(src) == b"{").count() as u32
            };
            let base = |stack: &[usize], sig: &[usize]| {
                match stack.iter().rposition(|&o| tokens[sig[o]].text(src) == b"{") {
                    Some(pos) => parens(&stack[..pos], sig),
                    None => 0,
                }
            };
            paren_depth.push(parens(&state.stack, &sig));
            brace_depth.push(braces(&state.stack, &sig));
            block_base.push(base(&state.stack, &sig));
            if tok.kind != TokenKind::Punctuator {
                continue;
            }
            match text {
                b"(" | b"[" | b"{" => state.stack.push(k),
                b")" | b"]" | b"}" => {
                    let want: &[u8] = match text {
                        b")" => b"(",
                        b"]" => b"[",
                        _ => b"{",
                    };
                    if let Some(&open) = state.stack.last() {
                        if tokens[sig[open]].text(src) == want {
                            state.stack.pop();
                            if partner[open].is_none() {
                                partner[open] = Some(k);
                                partner[k] = Some(open);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        let mut line_starts = vec![0];
        line_starts.extend(src.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i + 1));
        Ok(SourceView { src, tokens, directives, sig, partner, paren_depth, block_base, brace_depth, line_starts })
    }

    pub fn len(&self) -> usize {
        self.sig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sig.is_empty()
    }

    pub fn token(&self, k: usize) -> &Token {
        &self.tokens[self.sig[k]]
    }

    pub fn range(&self, k: usize) -> Range<usize> {
        self.token(k).range.clone()
    }

    pub fn span(&self, first: usize, last: usize) -> Range<usize> {
        self.token(first).range.start..self.token(last).range.end
    }

    pub fn bytes(&self, k: usize) -> &'a [u8] {
        let r = self.range(k);
        &self.src[r]
    }

    pub fn text(&self, k: usize) -> &'a str {
        std::str::from_utf8(self.bytes(k)).unwrap_or("\u{fffd}")
    }

    pub fn slice(&self, range: Range<usize>) -> String {
        String::from_utf8_lossy(&self.src[range]).into_owned()
    }

    pub fn is(&self, k: usize, text: &str) -> bool {
        k < self.len() && self.bytes(k) == text.as_bytes()
    }

    pub fn kind(&self, k: usize) -> TokenKind {
        self.token(k).kind
    }

    pub fn line_of(&self, k: usize) -> usize {
        self.token(k).line
    }

    pub fn partner(&self, k: usize) -> Option<usize> {
        self.partner.get(k).copied().flatten()
    }

    pub fn paren_depth(&self, k: usize) -> u32 {
        self.paren_depth[k]
    }

    pub fn brace_depth(&self, k: usize) -> u32 {
        self.brace_depth[k]
    }

    pub fn is_keyword(&self, k: usize) -> bool {
        self.kind(k) == TokenKind::Identifier && KEYWORDS.contains(&self.text(k))
    }

    /// Identifier that is not a keyword.
    pub fn is_name(&self, k: usize) -> bool {
        k < self.len() && self.kind(k) == TokenKind::Identifier && !self.is_keyword(k)
    }

    pub fn is_type_word(&self, k: usize) -> bool {
        self.kind(k) == TokenKind::Identifier && TYPE_WORDS.contains(&self.text(k))
    }

    pub fn is_literal(&self, k: usize) -> bool {
        matches!(self.kind(k), TokenKind::Number | TokenKind::String | TokenKind::CharLiteral)
    }

    /// Byte range of a 1-based line, newline excluded.
    pub fn line_range(&self, line: usize) -> Option<Range<usize>> {
        let start = *self.line_starts.get(line.checked_sub(1)?)?;
        let end = self.line_starts.get(line).map_or(self.src.len(), |&s| s - 1);
        Some(start..end.max(start))
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// Code tokens that begin on `line`.
    pub fn tokens_on_line(&self, line: usize) -> Range<usize> {
        let first = self.sig.partition_point(|&ti| self.tokens[ti].line < line);
        let last = self.sig.partition_point(|&ti| self.tokens[ti].line <= line);
        first..last
    }

    /// First code token whose range ends after `offset`.
    pub fn token_at_or_after(&self, offset: usize) -> Option<usize> {
        let k = self.sig.partition_point(|&ti| self.tokens[ti].range.end <= offset);
        (k < self.len()).then_some(k)
    }

    fn is_boundary(&self, k: usize) -> bool {
        match self.bytes(k) {
            b"{" | b"}" => true,
            b";" => self.paren_depth[k] == self.block_base[k],
            _ => false,
        }
    }

    /// The smallest statement around `k`, as inclusive token positions.
    /// A terminating `;` is part of the statement; braces are not.
    pub fn statement_bounds(&self, k: usize) -> (usize, usize) {
        let mut start = k;
        while start > 0 && !self.is_boundary(start - 1) {
            start -= 1;
        }
        if self.is_boundary(k) {
            return if self.is(k, ";") { (start, k) } else { (k, k) };
        }
        let mut end = k;
        while end + 1 < self.len() {
            let next = end + 1;
            if self.is_boundary(next) {
                if self.is(next, ";") {
                    end = next;
                }
                break;
            }
            end = next;
        }
        (start, end)
    }

    pub fn sigloc_statement_count(&self) -> usize {
        (0..self.len()).filter(|&k| self.is(k, ";") && self.is_boundary(k)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partners_follow_first_branch() {
        let src = b"void f(void) {\n#ifdef A\n  if (a) {\n#else\n  if (b) {\n#endif\n    x();\n  }\n}\n";
        let v = SourceView::new(src).unwrap();
        let open = (0..v.len()).find(|&k| v.is(k, "{")).unwrap();
        let close = v.partner(open).unwrap();
        assert_eq!(close, v.len() - 1);
    }

    #[test]
    fn statement_bounds_skip_for_header_semicolons() {
        let src = b"void f(void) { for (int x = foo(); x < bar(); x++) { baz(); } }";
        let v = SourceView::new(src).unwrap();
        let lt = (0..v.len()).find(|&k| v.is(k, "<")).unwrap();
        let (s, e) = v.statement_bounds(lt);
        assert_eq!(v.slice(v.span(s, e)), "for (int x = foo(); x < bar(); x++)");
        let baz = (0..v.len()).find(|&k| v.is(k, "baz")).unwrap();
        let (s, e) = v.statement_bounds(baz);
        assert_eq!(v.slice(v.span(s, e)), "baz();");
        assert_eq!(v.paren_depth(s), v.paren_depth(e));
    }

    #[test]
    fn line_ranges() {
        let v = SourceView::new(b"a\nbc\n").unwrap();
        assert_eq!(v.line_range(1), Some(0..1));
        assert_eq!(v.line_range(2), Some(2..4));
        assert_eq!(v.line_range(3), Some(5..5));
        assert_eq!(v.line_range(4), None);
        assert_eq!(v.tokens_on_line(2), 1..2);
    }
}
