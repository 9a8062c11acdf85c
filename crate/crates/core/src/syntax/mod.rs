//! Concrete syntax: logical types, terms (Unicode and ASCII) and ProofScript.

mod print;
pub mod script;
mod term;
mod types;

use std::fmt;

use thiserror::Error;

pub use print::{print_term, Mode};
pub use term::{parse_surface, parse_term, parse_term_at, elaborate, Surface};
pub use types::{parse_type, print_type};

/// One-based line and column of a character in a source text.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub const START: Pos = Pos { line: 1, column: 1 };

    pub fn new(line: u32, column: u32) -> Pos {
        Pos { line, column }
    }

    /// Position of `inner` relative to a text that starts at `self`.
    pub fn offset_by(self, inner: Pos) -> Pos {
        if inner.line <= 1 {
            Pos { line: self.line, column: self.column + inner.column - 1 }
        } else {
            Pos { line: self.line + inner.line - 1, column: inner.column }
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: Pos, message: String },
    #[error("unknown name '{name}' at {pos}")]
    Name { pos: Pos, name: String },
    #[error("type error at {pos}: {message}")]
    Type { pos: Pos, message: String },
}

impl SyntaxError {
    pub fn pos(&self) -> Pos {
        match self {
            SyntaxError::Parse { pos, .. }
            | SyntaxError::Name { pos, .. }
            | SyntaxError::Type { pos, .. } => *pos,
        }
    }

    pub(crate) fn parse(pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse { pos, message: message.into() }
    }

    pub(crate) fn shifted(self, base: Pos) -> SyntaxError {
        match self {
            SyntaxError::Parse { pos, message } => SyntaxError::Parse { pos: base.offset_by(pos), message },
            SyntaxError::Name { pos, name } => SyntaxError::Name { pos: base.offset_by(pos), name },
            SyntaxError::Type { pos, message } => SyntaxError::Type { pos: base.offset_by(pos), message },
        }
    }
}

/// Words that can never name a logical constant or bound variable.
pub const RESERVED_TERM_WORDS: [&str; 4] = ["true", "false", "set", "prop"];

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && !matches!(c, 'λ' | 'ε' | '𝒫')
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '_'
}

/// A name usable for a logical constant: a letter followed by letters,
/// digits or underscores, and not a reserved word.
pub fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    cs.all(is_ident_continue) && !RESERVED_TERM_WORDS.contains(&s)
}

/// Iterates a source text while tracking line and column.
#[derive(Clone)]
pub(crate) struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    pos: Pos,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Cursor<'a> {
        Cursor { src, offset: 0, pos: Pos::START }
    }

    pub fn pos(&self) -> Pos {
        self.pos
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek2(&self) -> Option<char> {
        self.rest().chars().nth(1)
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    pub fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    pub fn slice(&self, from: usize) -> &'a str {
        &self.src[from..self.offset]
    }
}
