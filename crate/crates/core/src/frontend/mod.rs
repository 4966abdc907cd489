//! Lexing, parsing and validation of P-program source text.
//!
//! ```text
//! program     ::= item* "return" "{" model-expr "}"
//! item        ::= component-def | context-def
//! component   ::= "def" IDENT "=" "component(" ident-list ")"
//! context-def ::= "var" IDENT "=" "context()" "{" stmt* return-stmt "}" ";"
//! stmt        ::= "var" IDENT "=" rand-expr | "var" IDENT "=" "[" ident-list "]"
//! rand-expr   ::= "flip(" DECIMAL ")" | IDENT "?" "flip(" DECIMAL ")" ":" "flip(" DECIMAL ")"
//! return-stmt ::= "return" "{" "Infer({samples:" INT "}," IDENT ")" "}"
//! model-expr  ::= "model(" ident-list ")" | "model({design:" "'" design "'" "," ident-list "})"
//! design      ::= "no-signal" | "signal(" IDENT "->" IDENT ")" | "order"
//! ```
//!
//! `#` starts a comment running to the end of the line.

mod ast;
mod lexer;
mod parser;
mod print;
mod validate;

use std::fmt;

use thiserror::Error;

pub use ast::{ComponentDef, ContextDef, Design, Ident, ModelDirective, Program, Span, Stmt};
pub use validate::{Bipartite, ValidatedProgram, ValidationError};

/// A malformed token or production.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
    /// Tokens that would have been accepted at `span`.
    pub expected: Vec<String>,
    pub found: String,
}

impl SyntaxError {
    pub(crate) fn new(span: Span, message: &str, expected: Vec<String>, found: &str) -> Self {
        SyntaxError { span, message: message.to_string(), expected, found: found.to_string() }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (found {}", self.span, self.message, self.found)?;
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        write!(f, ")")
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid program: {0}")]
    Validation(#[from] ValidationError),
}

pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    parser::parse(source)
}

pub fn validate(program: Program) -> Result<ValidatedProgram, ValidationError> {
    validate::validate(program)
}

/// Parse and validate in one step.
pub fn load(source: &str) -> Result<ValidatedProgram, FrontendError> {
    Ok(validate(parse(source)?)?)
}
