//! Line-oriented syntax shared by solver scripts and chunked programs.
//!
//! The surface language is a tiny Python subset: `def` headers, single
//! assignments whose right-hand side is a call expression, and `return`.
//! Comments are kept and attached to the statement that follows them.

use std::fmt;

use regex::Regex;
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// A physical line, or several joined by trailing backslashes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalLine {
    /// 1-based number of the first physical line.
    pub number: usize,
    /// 1-based number of the last physical line.
    pub last: usize,
    pub text: String,
}

/// Join lines ending in `\` with the line after them.
pub fn logical_lines(text: &str) -> Vec<LogicalLine> {
    let mut out: Vec<LogicalLine> = Vec::new();
    let mut pending: Option<LogicalLine> = None;
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let raw = raw.trim_end_matches('\r');
        let (body, continues) = match raw.trim_end().strip_suffix('\\') {
            Some(head) => (head.trim_end(), true),
            None => (raw, false),
        };
        let line = match pending.take() {
            Some(mut p) => {
                let piece = body.trim();
                if !piece.is_empty() {
                    p.text.push(' ');
                    p.text.push_str(piece);
                }
                p.last = number;
                p
            }
            None => LogicalLine {
                number,
                last: number,
                text: body.to_string(),
            },
        };
        if continues {
            pending = Some(line);
        } else {
            out.push(line);
        }
    }
    out.extend(pending);
    out
}

/// Apply [`logical_lines`] and return the joined text.
pub fn join_continuations(text: &str) -> String {
    let mut s: String = logical_lines(text)
        .into_iter()
        .map(|l| l.text)
        .collect::<Vec<_>>()
        .join("\n");
    if text.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// A raw expression before identifiers are classified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Name(String),
    Int(i64),
    Call {
        function: String,
        args: Vec<(Option<String>, Expr)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign { target: String, expr: Expr },
    Return(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
    /// Full-line comments directly above the statement, `#` stripped.
    pub comments: Vec<String>,
    pub inline_comment: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub annotation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Option<String>,
    pub line: usize,
    /// Last physical line belonging to the definition.
    pub end_line: usize,
    pub inline_comment: Option<String>,
    pub body: Vec<Stmt>,
    /// Comments after the last statement.
    pub trailing_comments: Vec<String>,
}

impl Def {
    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }
}

fn def_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^def\s+([A-Za-z_]\w*)\s*\((.*)\)\s*(?:->\s*(.+?))?\s*:$").unwrap()
    })
}

fn assignment() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Za-z_]\w*)\s*=\s*(.+)$").unwrap())
}

/// Split `code  # comment` at the first `#`.
fn split_comment(text: &str) -> (&str, Option<&str>) {
    match text.find('#') {
        Some(i) => (text[..i].trim_end(), Some(text[i + 1..].trim())),
        None => (text.trim_end(), None),
    }
}

/// Parse every definition in a program text.
pub fn parse_program(text: &str) -> Result<Vec<Def>, ParseError> {
    let mut defs: Vec<Def> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    for line in logical_lines(text) {
        let trimmed = line.text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indented = line.text.starts_with([' ', '\t']);
        if let Some(c) = trimmed.strip_prefix('#') {
            pending.push(c.trim().to_string());
            continue;
        }
        let (code, inline) = split_comment(trimmed);
        let inline_comment = inline.map(str::to_string);
        if !indented {
            let caps = def_header().captures(code).ok_or_else(|| {
                ParseError::new(line.number, format!("expected a function definition, found `{code}`"))
            })?;
            if let Some(prev) = defs.last_mut() {
                prev.trailing_comments.append(&mut pending);
            }
            pending.clear();
            defs.push(Def {
                name: caps[1].to_string(),
                params: parse_params(&caps[2], line.number)?,
                returns: caps.get(3).map(|m| m.as_str().trim().to_string()),
                line: line.number,
                end_line: line.last,
                inline_comment,
                body: Vec::new(),
                trailing_comments: Vec::new(),
            });
            continue;
        }
        let def = defs
            .last_mut()
            .ok_or_else(|| ParseError::new(line.number, "statement outside a function definition"))?;
        let kind = if let Some(rest) = code.strip_prefix("return") {
            if !rest.is_empty() && !rest.starts_with([' ', '\t', '(']) {
                return Err(ParseError::new(line.number, format!("unrecognised statement `{code}`")));
            }
            let rest = rest.trim();
            if rest.is_empty() {
                return Err(ParseError::new(line.number, "return without a value"));
            }
            StmtKind::Return(parse_expr(rest, line.number)?)
        } else if let Some(caps) = assignment().captures(code) {
            StmtKind::Assign {
                target: caps[1].to_string(),
                expr: parse_expr(&caps[2], line.number)?,
            }
        } else {
            return Err(ParseError::new(line.number, format!("unrecognised statement `{code}`")));
        };
        def.body.push(Stmt {
            line: line.number,
            kind,
            comments: std::mem::take(&mut pending),
            inline_comment,
        });
        def.end_line = line.last;
    }
    if let Some(last) = defs.last_mut() {
        last.trailing_comments.append(&mut pending);
    }
    Ok(defs)
}

fn parse_params(text: &str, line: usize) -> Result<Vec<Param>, ParseError> {
    let mut params = Vec::new();
    for piece in split_top_level(text) {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (name, annotation) = match piece.split_once(':') {
            Some((n, t)) => (n.trim(), Some(t.trim().to_string())),
            None => (piece, None),
        };
        if !is_identifier(name) {
            return Err(ParseError::new(line, format!("bad parameter `{piece}`")));
        }
        params.push(Param {
            name: name.to_string(),
            annotation,
        });
    }
    Ok(params)
}

/// Split on commas that are not nested in brackets.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
            Tok::Eq => f.write_str("="),
        }
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '=' => {
                toks.push(Tok::Eq);
                i += 1;
            }
            '-' | '0'..='9' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let n = lit
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(line, format!("bad integer literal `{lit}`")))?;
                toks.push(Tok::Int(n));
            }
            c if c == '_' || c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i] == '_' || chars[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(ParseError::new(line, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(toks)
}

/// Parse a single expression: a name, an integer or a (nested) call.
pub fn parse_expr(text: &str, line: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(text, line)?;
    let mut p = ExprParser { toks, pos: 0, line };
    let e = p.expr()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(ParseError::new(line, format!("unexpected `{t}` after expression")));
    }
    Ok(e)
}

struct ExprParser {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
}

impl ExprParser {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.args()?;
                    if self.peek() == Some(&Tok::LParen) {
                        return Err(self.err("calling the result of a call is not supported"));
                    }
                    Ok(Expr::Call {
                        function: name,
                        args,
                    })
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Some(t) => Err(self.err(format!("unexpected `{t}`"))),
            None => Err(self.err("unexpected end of line")),
        }
    }

    fn args(&mut self) -> Result<Vec<(Option<String>, Expr)>, ParseError> {
        let mut args = Vec::new();
        loop {
            if self.peek() == Some(&Tok::RParen) {
                self.pos += 1;
                return Ok(args);
            }
            let keyword = match (self.toks.get(self.pos), self.toks.get(self.pos + 1)) {
                (Some(Tok::Ident(k)), Some(Tok::Eq)) => {
                    let k = k.clone();
                    self.pos += 2;
                    Some(k)
                }
                _ => None,
            };
            args.push((keyword, self.expr()?));
            match self.next() {
                Some(Tok::Comma) => {}
                Some(Tok::RParen) => return Ok(args),
                Some(t) => return Err(self.err(format!("expected `,` or `)`, found `{t}`"))),
                None => return Err(self.err("unclosed `(`")),
            }
        }
    }
}
