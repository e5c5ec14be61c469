use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dsl::ParseError;
use crate::report::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokKind {
    Word(String),
    /// Magnitude only; a leading `-` is a separate symbol.
    Int(u64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Word(w) => write!(f, "`{w}`"),
            TokKind::Int(n) => write!(f, "`{n}`"),
            TokKind::Str(_) => f.write_str("string literal"),
            TokKind::Sym(s) => write!(f, "`{s}`"),
            TokKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Tok {
    pub kind: TokKind,
    pub start: Pos,
    pub end: Pos,
}

const SYMBOLS: [&str; 21] = [
    "->", "==", "!=", "<=", ">=", "{", "}", "(", ")", ",", ";", ":", ".", "@", "<", ">", "=", "+",
    "-", "*", "/",
];

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    rest: &'a str,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Tok>, ParseError> {
    let mut cur = Cursor { chars: text.chars().peekable(), rest: text, pos: Pos::new(1, 1) };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        if cur.rest.starts_with("//") {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let start = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Tok { kind: TokKind::Eof, start, end: start });
            return Ok(out);
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut w = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                w.push(c);
                cur.bump();
            }
            TokKind::Word(w)
        } else if c.is_ascii_digit() {
            let mut n: u64 = 0;
            while let Some(d) = cur.peek().and_then(|c| c.to_digit(10)) {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(u64::from(d)))
                    .ok_or_else(|| ParseError::syntax(start, "integer literal", &["smaller integer"]))?;
                cur.bump();
            }
            TokKind::Int(n)
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseError::syntax(start, "unterminated string", &["`\"`"]))
                    }
                    Some('"') => break,
                    Some('\\') => {
                        let esc = cur.pos;
                        s.push(match cur.bump() {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('r') => '\r',
                            _ => {
                                return Err(ParseError::syntax(
                                    esc,
                                    "escape",
                                    &["`\\\"`", "`\\\\`", "`\\n`", "`\\t`", "`\\r`"],
                                ))
                            }
                        });
                    }
                    Some(c) => s.push(c),
                }
            }
            TokKind::Str(s)
        } else if let Some(sym) = SYMBOLS.iter().find(|s| cur.rest.starts_with(**s)) {
            for _ in 0..sym.len() {
                cur.bump();
            }
            TokKind::Sym(sym)
        } else {
            return Err(ParseError::syntax(
                start,
                alloc::format!("character `{c}`"),
                &["identifier", "literal", "symbol"],
            ));
        };
        out.push(Tok { kind, start, end: cur.pos });
    }
}
