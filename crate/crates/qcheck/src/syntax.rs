//! Shared lexer and s-expression reader for the input formats.

use std::fmt;

use thiserror::Error;

/// Position of a token: 1-based line, 1-based column range (end exclusive).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}", self.line, self.col_start, self.col_end)
    }
}

/// Positioned diagnostic. `file` is filled in by callers that know it.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}{}:{}: {message}", file.as_deref().map(|f| format!("{f}:")).unwrap_or_default(), span.line, span.col_start)]
pub struct ParseError {
    pub file: Option<String>,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError { file: None, span, message: message.into() }
    }

    pub fn in_file(mut self, file: &str) -> Self {
        self.file = Some(file.to_string());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident,
    Number,
    /// Punctuation and operator symbols; the text holds the symbol.
    Sym,
    LParen,
    RParen,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: Tok,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        self.kind == Tok::Sym && self.text == s
    }
    pub fn is_word(&self, s: &str) -> bool {
        self.kind == Tok::Ident && self.text == s
    }
}

const TWO_CHAR: [&str; 4] = ["->", "=>", "<=", ">="];
const ONE_CHAR: &str = "{}[]:,;+*|@!?<>=-/";

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_cont(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

/// Split `text` into tokens. `--` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind;
        if ident_start(c) || (c == '.' && chars.get(i + 1).is_some_and(|d| ident_start(*d))) {
            i += 1;
            while i < chars.len() && ident_cont(chars[i]) {
                i += 1;
            }
            kind = Tok::Ident;
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && ident_start(chars[i]) {
                let sp = Span { line, col_start: col, col_end: col + (i - start) + 1 };
                return Err(ParseError::new(sp, "malformed number"));
            }
            kind = Tok::Number;
        } else if c == '(' {
            i += 1;
            kind = Tok::LParen;
        } else if c == ')' {
            i += 1;
            kind = Tok::RParen;
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            if TWO_CHAR.contains(&two.as_str()) {
                i += 2;
            } else if ONE_CHAR.contains(c) {
                i += 1;
            } else {
                let sp = Span { line, col_start: col, col_end: col + 1 };
                return Err(ParseError::new(sp, format!("unexpected character '{c}'")));
            }
            kind = Tok::Sym;
        }
        let len = i - start;
        out.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            span: Span { line, col_start: col, col_end: col + len },
        });
        col += len;
    }
    out.push(Token { kind: Tok::Eof, text: String::new(), span: Span { line, col_start: col, col_end: col } });
    Ok(out)
}

/// Token cursor used by the recursive-descent parsers.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(text)?, pos: 0 })
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn peek_at(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == Tok::Eof
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.peek().span, msg))
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek().is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, s: &str) -> bool {
        if self.peek().is_word(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<Token, ParseError> {
        if self.peek().is_sym(s) {
            Ok(self.next())
        } else {
            self.error(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    pub fn expect_word(&mut self, s: &str) -> Result<Token, ParseError> {
        if self.peek().is_word(s) {
            Ok(self.next())
        } else {
            self.error(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<Token, ParseError> {
        if self.peek().kind == Tok::Ident {
            Ok(self.next())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    /// Identifier or bare number (state ids may be either).
    pub fn expect_name(&mut self, what: &str) -> Result<Token, ParseError> {
        match self.peek().kind {
            Tok::Ident | Tok::Number => Ok(self.next()),
            _ => self.error(format!("expected {what}, found {}", describe(self.peek()))),
        }
    }

    pub fn sexpr(&mut self) -> Result<SExpr, ParseError> {
        let t = self.next();
        match t.kind {
            Tok::LParen => {
                let mut items = Vec::new();
                loop {
                    match self.peek().kind {
                        Tok::RParen => {
                            let end = self.next();
                            let span = Span { line: t.span.line, col_start: t.span.col_start, col_end: if end.span.line == t.span.line { end.span.col_end } else { t.span.col_end } };
                            return Ok(SExpr::List(items, span));
                        }
                        Tok::Eof => return Err(ParseError::new(t.span, "unclosed parenthesis")),
                        _ => items.push(self.sexpr()?),
                    }
                }
            }
            Tok::Ident => {
                // SMT-LIB command names such as `check-sat` are split by the tokenizer
                let (mut text, mut span) = (t.text, t.span);
                while self.glued(0, &span, |k| k.is_sym("-")) && self.glued(1, &span, |k| k.kind == Tok::Ident) {
                    let (dash, rest) = (self.next(), self.next());
                    text.push_str(&dash.text);
                    text.push_str(&rest.text);
                    span.col_end = rest.span.col_end;
                }
                Ok(SExpr::Atom(text, span))
            }
            Tok::Number => Ok(SExpr::Atom(t.text, t.span)),
            Tok::Sym if "{}[]:,;|@!?".contains(t.text.as_str()) || t.text == "->" => {
                Err(ParseError::new(t.span, format!("unexpected '{}' in term", t.text)))
            }
            Tok::Sym => Ok(SExpr::Atom(t.text, t.span)),
            Tok::RParen => Err(ParseError::new(t.span, "unexpected ')'")),
            Tok::Eof => Err(ParseError::new(t.span, "unexpected end of input")),
        }
    }
}

impl Cursor {
    /// Token `offset` ahead is adjacent to `span` (offset 1 is checked against offset 0) and satisfies `pred`.
    fn glued(&self, offset: usize, span: &Span, pred: impl Fn(&Token) -> bool) -> bool {
        let t = self.peek_at(offset);
        let prev_end = if offset == 0 { span.col_end } else { self.peek_at(offset - 1).span.col_end };
        t.span.line == span.line && t.span.col_start == prev_end && pred(t)
    }
}

pub fn describe(t: &Token) -> String {
    match t.kind {
        Tok::Eof => "end of input".to_string(),
        _ => format!("'{}'", t.text),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Span),
    List(Vec<SExpr>, Span),
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Atom(_, s) | SExpr::List(_, s) => *s,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a, _) => Some(a),
            _ => None,
        }
    }
}
