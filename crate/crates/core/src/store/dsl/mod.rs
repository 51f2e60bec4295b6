//! Filter expressions over trail attributes.
//!
//! ```text
//! filter := [expr] ["ORDER BY" field ["ASC" | "DESC"]] ["LIMIT" int]
//! expr   := and ("OR" and)*
//! and    := not ("AND" not)*
//! not    := ["NOT"] prim
//! prim   := "(" expr ")" | field cmpop literal | "activities" "HAS" string
//! cmpop  := "=" | "!=" | "<>" | "≠" | "<" | "<=" | "≤" | ">" | ">=" | "≥"
//! ```
//!
//! Keywords are case-insensitive, field names are not. Strings are double
//! quoted with `\"` and `\\` escapes; numbers are plain decimals. Parsing
//! only builds an AST; nothing is executed until [`TrailStore::exec_filter`].
//!
//! [`TrailStore::exec_filter`]: crate::store::TrailStore::exec_filter

mod ast;
mod lexer;
mod parser;

use std::fmt;

pub(crate) use ast::quote;
pub use ast::{schema_fields, CmpOp, Expr, Field, FieldKind, FilterExpr, Literal, OrderBy, SortDir};

/// Parenthesis nesting accepted before the parser gives up.
pub const MAX_NESTING: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    UnknownField { name: String },
    TypeMismatch { field: String, detail: String },
    TooDeep,
}

/// `position` is a character offset into the input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: ", self.position)?;
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "expected {}, found {found}", expected.join(" or "))
            }
            ParseErrorKind::UnknownField { name } => {
                write!(f, "unknown field `{name}` (known: {})", schema_fields().join(", "))
            }
            ParseErrorKind::TypeMismatch { field, detail } => {
                write!(f, "type mismatch on `{field}`: {detail}")
            }
            ParseErrorKind::TooDeep => write!(f, "parentheses nested deeper than {MAX_NESTING}"),
        }
    }
}

impl ParseError {
    pub fn expected(&self) -> &[String] {
        match &self.kind {
            ParseErrorKind::Syntax { expected, .. } => expected,
            _ => &[],
        }
    }
}

/// Parse filter text; empty or blank input matches every trail.
pub fn parse_filter(text: &str) -> Result<FilterExpr, ParseError> {
    let toks = lexer::tokenize(text)?;
    parser::Parser::new(toks, text.chars().count()).parse_filter()
}

impl std::str::FromStr for FilterExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_filter(s)
    }
}
