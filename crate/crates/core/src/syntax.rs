//! Tokenizer and cursor shared by the expression, formula and file parsers.

use std::fmt;

use thiserror::Error;

/// A syntax error tagged with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }

    /// Shift the offset by `base`, used when a fragment was cut out of a larger text.
    pub fn shifted(mut self, base: usize) -> Self {
        self.offset += base;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Eq,
    NotEq,
    Ge,
    Le,
    Bang,
    Amp,
    Pipe,
    Plus,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(v) => write!(f, "integer `{v}`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Whether `name` is a valid identifier in every textual format.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            '=' => {
                i += 1;
                Tok::Eq
            }
            '!' if two(b'=') => {
                i += 2;
                Tok::NotEq
            }
            '!' => {
                i += 1;
                Tok::Bang
            }
            '>' if two(b'=') => {
                i += 2;
                Tok::Ge
            }
            '<' if two(b'=') => {
                i += 2;
                Tok::Le
            }
            '<' if two(b'-') => {
                i += 2;
                Tok::Arrow
            }
            '&' => {
                i += 1;
                Tok::Amp
            }
            '|' => {
                i += 1;
                Tok::Pipe
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '-' | '0'..='9' => {
                let neg = c == '-';
                let digits_start = if neg { i + 1 } else { i };
                let mut j = digits_start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == digits_start {
                    return Err(ParseError::new(start, "expected digits"));
                }
                let value: i64 = text[start..j]
                    .parse()
                    .map_err(|_| ParseError::new(start, "integer literal out of range"))?;
                i = j;
                Tok::Int(value)
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < bytes.len() && is_ident_char(bytes[j] as char) {
                    j += 1;
                }
                let word = text[i..j].to_string();
                i = j;
                Tok::Ident(word)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

/// Token stream with one-token lookahead and end-of-input offsets.
pub(crate) struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    /// Offset of the next token, or the end of the text.
    pub(crate) fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    pub(crate) fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<usize, ParseError> {
        let off = self.offset();
        match self.next() {
            Some((o, t)) if &t == tok => Ok(o),
            Some((o, t)) => Err(ParseError::new(o, format!("expected {tok}, found {t}"))),
            None => Err(ParseError::new(off, format!("expected {tok}, found end of input"))),
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(usize, String), ParseError> {
        let off = self.offset();
        match self.next() {
            Some((o, Tok::Ident(s))) => Ok((o, s)),
            Some((o, t)) => Err(ParseError::new(o, format!("expected identifier, found {t}"))),
            None => Err(ParseError::new(off, "expected identifier, found end of input")),
        }
    }

    pub(crate) fn int(&mut self) -> Result<(usize, i64), ParseError> {
        let off = self.offset();
        match self.next() {
            Some((o, Tok::Int(v))) => Ok((o, v)),
            Some((o, t)) => Err(ParseError::new(o, format!("expected integer, found {t}"))),
            None => Err(ParseError::new(off, "expected integer, found end of input")),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some((o, t)) => Err(ParseError::new(*o, format!("unexpected trailing {t}"))),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}
