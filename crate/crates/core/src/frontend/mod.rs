//! MiniScript front end: lexer, parser and printer.
//!
//! MiniScript is a small JavaScript-like language. Statements end in `;`,
//! blocks use braces, functions are first-class closures, and records and
//! arrays have reference semantics. `let` bindings are scoped to the
//! enclosing function (like JavaScript `var`), which is also how catch
//! parameters and function declarations bind. Identifiers beginning with `$`
//! are reserved for compiler-generated code.

pub mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use parser::{parse, parse_generated};
pub use printer::{format_number, print, print_expr, quote};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("syntax error at {loc}: {message}")]
pub struct SyntaxError {
    pub loc: SourceLoc,
    pub message: String,
}

impl SyntaxError {
    pub fn new(loc: SourceLoc, message: impl Into<String>) -> Self {
        SyntaxError {
            loc,
            message: message.into(),
        }
    }
}
