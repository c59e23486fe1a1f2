//! Lexer, parser and canonical printer for the read-only Cypher subset.

pub mod ast;
pub mod lexer;
mod parser;
mod printer;
mod scope;

use serde::Serialize;
use thiserror::Error;

pub use ast::*;
pub use parser::{is_reserved, parse_literal_map, parse_query};
pub use printer::{print_literal, print_pattern, print_query};
pub use scope::{check_scope, ScopeError};

/// Syntax error with a 1-based position and the offending token text.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("syntax error at line {line}, column {column} near `{found}`: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    /// Byte offset of the offending token.
    pub offset: usize,
    pub found: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(SyntaxError),
    #[error("unsupported feature at line {line}, column {column}: {feature}")]
    Unsupported {
        feature: String,
        line: usize,
        column: usize,
    },
}

/// Number of relationship patterns across all MATCH clauses.
pub fn hop_count(ast: &QueryAst) -> usize {
    ast.match_patterns().map(Pattern::hop_count).sum()
}
