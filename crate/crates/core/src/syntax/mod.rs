//! Concrete syntax of Hypothetical Datalog: lexer, parser and printer.

mod ast;
mod lexer;
mod parser;
pub mod pretty;

use std::fmt;

pub use ast::*;
pub use lexer::Pos;
pub use parser::{parse_goal, parse_input, parse_program, parse_rule, VIEW_PREDICATE};
pub use pretty::rule_spaced;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { pos, message: message.into() }
    }

    fn shifted(mut self, cols: usize) -> Self {
        if self.pos.line == 1 {
            self.pos.col += cols;
        }
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.pos.line, self.pos.col, self.message)
    }
}
