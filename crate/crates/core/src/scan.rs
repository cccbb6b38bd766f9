//! Lexical layer over C source bytes.
//!
//! The scanner never preprocesses. It tiles the input into tokens, pairs up
//! conditional directives into groups, and answers one question for the
//! repair engine: does a byte range interact with any `#if` group?

use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Number,
    String,
    CharLiteral,
    Punctuator,
    Comment,
    Whitespace,
    DirectiveLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub range: Range<usize>,
    /// 1-based line of the first byte.
    pub line: usize,
}

impl Token {
    pub fn text<'a>(&self, source: &'a [u8]) -> &'a [u8] {
        &source[self.range.clone()]
    }

    pub fn is_trivia(&self) -> bool {
        matches!(self.kind, TokenKind::Comment | TokenKind::Whitespace)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("unterminated block comment opened on line {line}")]
    UnterminatedComment { line: usize },
    #[error("unterminated string literal opened on line {line}")]
    UnterminatedString { line: usize },
    #[error("unterminated character literal opened on line {line}")]
    UnterminatedChar { line: usize },
    #[error("#{directive} on line {line} has no matching #if")]
    UnmatchedDirective { directive: &'static str, line: usize },
    #[error("#if group opened on line {line} is never closed")]
    UnterminatedGroup { line: usize },
}

const PUNCTUATORS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##",
];

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    tokens: Vec<Token>,
    at_line_start: bool,
}

impl<'a> Lexer<'a> {
    fn peek(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn continuation_len(&self, at: usize) -> usize {
        match (self.src.get(at), self.src.get(at + 1), self.src.get(at + 2)) {
            (Some(b'\\'), Some(b'\n'), _) => 2,
            (Some(b'\\'), Some(b'\r'), Some(b'\n')) => 3,
            _ => 0,
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, start_line: usize) {
        self.tokens.push(Token { kind, range: start..self.pos, line: start_line });
    }

    fn bump_to(&mut self, end: usize) {
        self.line += self.src[self.pos..end].iter().filter(|&&b| b == b'\n').count();
        self.pos = end;
    }

    /// Returns the end offset of a block comment starting at `at` (which
    /// points at `/*`).
    fn block_comment_end(&self, at: usize, line: usize) -> Result<usize, ScanError> {
        let mut i = at + 2;
        while i + 1 < self.src.len() {
            if self.src[i] == b'*' && self.src[i + 1] == b'/' {
                return Ok(i + 2);
            }
            i += 1;
        }
        Err(ScanError::UnterminatedComment { line })
    }

    /// End of a `//` comment (exclusive of the terminating newline).
    fn line_comment_end(&self, at: usize) -> usize {
        let mut i = at + 2;
        while i < self.src.len() {
            let cont = self.continuation_len(i);
            if cont > 0 {
                i += cont;
                continue;
            }
            if self.src[i] == b'\n' {
                break;
            }
            i += 1;
        }
        i
    }

    /// End of a quoted literal starting at `at` (pointing at the quote).
    /// `None` when the literal hits a newline or EOF first.
    fn quoted_end(&self, at: usize, quote: u8) -> Option<usize> {
        let mut i = at + 1;
        while i < self.src.len() {
            match self.src[i] {
                b'\\' => i += 2,
                b'\n' => return None,
                b if b == quote => return Some(i + 1),
                _ => i += 1,
            }
        }
        None
    }

    fn directive_end(&self, at: usize) -> Result<usize, ScanError> {
        let mut i = at + 1;
        let mut line = self.line;
        while i < self.src.len() {
            let cont = self.continuation_len(i);
            if cont > 0 {
                i += cont;
                line += 1;
                continue;
            }
            match self.src[i] {
                b'\n' => break,
                b'/' if self.src.get(i + 1) == Some(&b'*') => {
                    let end = self.block_comment_end(i, line)?;
                    line += self.src[i..end].iter().filter(|&&b| b == b'\n').count();
                    i = end;
                }
                b'/' if self.src.get(i + 1) == Some(&b'/') => {
                    i = self.line_comment_end(i);
                }
                q @ (b'"' | b'\'') => {
                    // `#error don't` is legal; an unmatched quote runs to end of line.
                    i = self.quoted_end(i, q).unwrap_or_else(|| {
                        let mut j = i + 1;
                        while j < self.src.len() && self.src[j] != b'\n' {
                            j += 1;
                        }
                        j
                    });
                }
                _ => i += 1,
            }
        }
        Ok(i)
    }

    fn number_end(&self, at: usize) -> usize {
        let mut i = at + 1;
        while i < self.src.len() {
            let b = self.src[i];
            let exponent_sign = (b == b'+' || b == b'-') && matches!(self.src[i - 1], b'e' | b'E' | b'p' | b'P');
            // C23 digit separator: 1'000'000
            let separator = b == b'\''
                && i + 1 < self.src.len()
                && self.src[i + 1].is_ascii_alphanumeric()
                && self.src[i - 1].is_ascii_alphanumeric();
            if !(exponent_sign || separator || is_ident_continue(b) || b == b'.') {
                break;
            }
            i += 1;
        }
        i
    }

    fn run(mut self) -> Result<Vec<Token>, ScanError> {
        while self.pos < self.src.len() {
            let start = self.pos;
            let start_line = self.line;
            let b = self.src[self.pos];
            let cont = self.continuation_len(self.pos);
            if b.is_ascii_whitespace() || cont > 0 {
                let mut end = self.pos;
                let mut saw_newline = false;
                loop {
                    let c = self.continuation_len(end);
                    if c > 0 {
                        end += c;
                    } else if end < self.src.len() && self.src[end].is_ascii_whitespace() {
                        saw_newline |= self.src[end] == b'\n';
                        end += 1;
                    } else {
                        break;
                    }
                }
                self.bump_to(end);
                self.push(TokenKind::Whitespace, start, start_line);
                if saw_newline {
                    self.at_line_start = true;
                }
                continue;
            }
            if b == b'/' && self.peek(1) == Some(b'*') {
                let end = self.block_comment_end(self.pos, self.line)?;
                self.bump_to(end);
                self.push(TokenKind::Comment, start, start_line);
                continue;
            }
            if b == b'/' && self.peek(1) == Some(b'/') {
                let end = self.line_comment_end(self.pos);
                self.bump_to(end);
                self.push(TokenKind::Comment, start, start_line);
                continue;
            }
            if b == b'#' && self.at_line_start {
                let end = self.directive_end(self.pos)?;
                self.bump_to(end);
                self.push(TokenKind::DirectiveLine, start, start_line);
                continue;
            }
            self.at_line_start = false;
            if b == b'"' || b == b'\'' {
                let end = self.quoted_end(self.pos, b).ok_or(if b == b'"' {
                    ScanError::UnterminatedString { line: start_line }
                } else {
                    ScanError::UnterminatedChar { line: start_line }
                })?;
                self.bump_to(end);
                let kind = if b == b'"' { TokenKind::String } else { TokenKind::CharLiteral };
                self.push(kind, start, start_line);
                continue;
            }
            if is_ident_start(b) {
                let mut end = self.pos + 1;
                while end < self.src.len() && is_ident_continue(self.src[end]) {
                    end += 1;
                }
                let word = &self.src[self.pos..end];
                let prefix = matches!(word, b"L" | b"u" | b"U" | b"u8");
                if prefix && matches!(self.src.get(end), Some(b'"') | Some(b'\'')) {
                    let quote = self.src[end];
                    let lit_end = self.quoted_end(end, quote).ok_or(
                        ScanError::UnterminatedString { line: start_line },
                    )?;
                    self.bump_to(lit_end);
                    let kind = if quote == b'"' { TokenKind::String } else { TokenKind::CharLiteral };
                    self.push(kind, start, start_line);
                } else {
                    self.bump_to(end);
                    self.push(TokenKind::Identifier, start, start_line);
                }
                continue;
            }
            if b.is_ascii_digit() || (b == b'.' && self.peek(1).is_some_and(|c| c.is_ascii_digit())) {
                let end = self.number_end(self.pos);
                self.bump_to(end);
                self.push(TokenKind::Number, start, start_line);
                continue;
            }
            let rest = &self.src[self.pos..];
            let len = PUNCTUATORS
                .iter()
                .find(|p| rest.starts_with(p.as_bytes()))
                .map_or(1, |p| p.len());
            self.bump_to(self.pos + len);
            self.push(TokenKind::Punctuator, start, start_line);
        }
        Ok(self.tokens)
    }
}

/// Tiles `source` into tokens. Concatenating every token's bytes reproduces
/// the input exactly.
pub fn scan_tokens(source: &[u8]) -> Result<Vec<Token>, ScanError> {
    Lexer { src: source, pos: 0, line: 1, tokens: Vec::new(), at_line_start: true }.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectiveKind {
    If,
    Ifdef,
    Ifndef,
    Elif,
    Else,
    Endif,
}

impl DirectiveKind {
    pub fn is_opening(self) -> bool {
        matches!(self, DirectiveKind::If | DirectiveKind::Ifdef | DirectiveKind::Ifndef)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectiveRegion {
    pub kind: DirectiveKind,
    /// The directive line, continuations included.
    pub range: Range<usize>,
    pub line: usize,
    pub group_id: usize,
    pub depth: usize,
}

/// Name of the directive on a directive-line token, e.g. `ifdef` for
/// `#  ifdef FOO`.
pub fn directive_name(text: &[u8]) -> &[u8] {
    let mut i = 1;
    while i < text.len() && matches!(text[i], b' ' | b'\t') {
        i += 1;
    }
    let start = i;
    while i < text.len() && is_ident_continue(text[i]) {
        i += 1;
    }
    &text[start..i]
}

fn conditional_kind(name: &[u8]) -> Option<DirectiveKind> {
    Some(match name {
        b"if" => DirectiveKind::If,
        b"ifdef" => DirectiveKind::Ifdef,
        b"ifndef" => DirectiveKind::Ifndef,
        b"elif" | b"elifdef" | b"elifndef" => DirectiveKind::Elif,
        b"else" => DirectiveKind::Else,
        b"endif" => DirectiveKind::Endif,
        _ => return None,
    })
}

/// Conditional directives of an already-scanned token list, with
/// `#if`…`#endif` chains matched into groups.
pub fn directives_from_tokens(
    source: &[u8],
    tokens: &[Token],
) -> Result<Vec<DirectiveRegion>, ScanError> {
    let mut out = Vec::new();
    // (group id, depth, opening line)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    let mut next_group = 0;
    for tok in tokens.iter().filter(|t| t.kind == TokenKind::DirectiveLine) {
        let Some(kind) = conditional_kind(directive_name(tok.text(source))) else {
            continue;
        };
        let (group_id, depth) = if kind.is_opening() {
            let depth = stack.len() + 1;
            stack.push((next_group, depth, tok.line));
            next_group += 1;
            (next_group - 1, depth)
        } else {
            let &(group, depth, _) = stack.last().ok_or(ScanError::UnmatchedDirective {
                directive: match kind {
                    DirectiveKind::Elif => "elif",
                    DirectiveKind::Else => "else",
                    _ => "endif",
                },
                line: tok.line,
            })?;
            if kind == DirectiveKind::Endif {
                stack.pop();
            }
            (group, depth)
        };
        out.push(DirectiveRegion { kind, range: tok.range.clone(), line: tok.line, group_id, depth });
    }
    if let Some(&(_, _, line)) = stack.first() {
        return Err(ScanError::UnterminatedGroup { line });
    }
    Ok(out)
}

pub fn scan_directives(source: &[u8]) -> Result<Vec<DirectiveRegion>, ScanError> {
    let tokens = scan_tokens(source)?;
    directives_from_tokens(source, &tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RangeClass {
    Independent,
    Embedded,
    Mixed,
}

fn overlaps(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

fn contains(outer: &Range<usize>, inner: &Range<usize>) -> bool {
    outer.start <= inner.start && inner.end <= outer.end
}

/// Classifies `range` against already-matched directive groups.
///
/// A group intersects the range when any of its directive lines overlaps
/// it. Embedded requires every intersecting group to lie wholly inside the
/// range; anything else that touches a directive is Mixed.
pub fn classify_with(directives: &[DirectiveRegion], range: &Range<usize>) -> RangeClass {
    let mut touched: Vec<usize> = directives
        .iter()
        .filter(|d| overlaps(&d.range, range))
        .map(|d| d.group_id)
        .collect();
    if touched.is_empty() {
        return RangeClass::Independent;
    }
    touched.sort_unstable();
    touched.dedup();
    let whole = touched.iter().all(|&g| {
        directives.iter().filter(|d| d.group_id == g).all(|d| contains(range, &d.range))
    });
    if whole {
        RangeClass::Embedded
    } else {
        RangeClass::Mixed
    }
}

pub fn classify_range(source: &[u8], range: Range<usize>) -> Result<RangeClass, ScanError> {
    Ok(classify_with(&scan_directives(source)?, &range))
}

pub fn is_independent(source: &[u8], range: Range<usize>) -> Result<bool, ScanError> {
    Ok(classify_range(source, range)? == RangeClass::Independent)
}

/// Significant lines: lines holding at least one token that is neither a
/// comment nor whitespace.
pub fn sigloc_from_tokens(tokens: &[Token], source: &[u8]) -> usize {
    let mut counted = Vec::new();
    let mut mark = |line: usize| {
        if counted.len() <= line {
            counted.resize(line + 1, false);
        }
        counted[line] = true;
    };
    for tok in tokens.iter().filter(|t| !t.is_trivia()) {
        let newlines = tok.text(source).iter().filter(|&&b| b == b'\n').count();
        for line in tok.line..=tok.line + newlines {
            mark(line);
        }
    }
    counted.iter().filter(|&&c| c).count()
}

pub fn count_sigloc(source: &[u8]) -> Result<usize, ScanError> {
    Ok(sigloc_from_tokens(&scan_tokens(source)?, source))
}
