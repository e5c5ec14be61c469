//! Textual notations for the four diagram kinds, plus stimuli files.

mod ast;
mod lexer;
mod parser;
mod print;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub use ast::*;
pub use parser::{is_reserved, parse, parse_expr, parse_stimuli, parse_with_extension};
pub use print::{serialize, serialize_stimuli};

use crate::model::Message;
use crate::report::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: unexpected {found}, expected {}", ExpectedList(expected))]
    Syntax { pos: Pos, found: String, expected: Vec<String> },
    #[error("{pos}: duplicate {what} `{name}`")]
    DuplicateName { pos: Pos, what: &'static str, name: String },
    #[error("{pos}: undeclared {what} `{name}`")]
    UndeclaredName { pos: Pos, what: &'static str, name: String },
    #[error("unknown document kind `{0}`")]
    UnknownKind(String),
}

struct ExpectedList<'a>(&'a [String]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(if i + 1 == self.0.len() { " or " } else { ", " })?;
            }
            f.write_str(e)?;
        }
        Ok(())
    }
}

impl ParseError {
    pub(crate) fn syntax(pos: Pos, found: impl fmt::Display, expected: &[&str]) -> Self {
        ParseError::Syntax {
            pos,
            found: alloc::format!("{found}"),
            expected: expected.iter().map(|s| String::from(*s)).collect(),
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::DuplicateName { pos, .. }
            | ParseError::UndeclaredName { pos, .. } => Some(*pos),
            ParseError::UnknownKind(_) => None,
        }
    }
}

/// An environment message injected at the start of `round` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Stimulus {
    pub round: usize,
    pub message: Message,
}

#[cfg(test)]
mod tests;
