use super::ast::{CmpOp, Expr, Field, FieldKind, FilterExpr, Literal, OrderBy, SortDir};
use super::lexer::{Spanned, Tok};
use super::{ParseError, ParseErrorKind, MAX_NESTING};
use crate::store::{Activity, Difficulty, TriState};

const KEYWORDS: &[&str] = &["AND", "OR", "NOT", "HAS", "ORDER", "BY", "ASC", "DESC", "LIMIT"];

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    end_pos: usize,
    depth: usize,
}

impl Parser {
    pub(crate) fn new(toks: Vec<Spanned>, end_pos: usize) -> Self {
        Self { toks, at: 0, end_pos, depth: 0 }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end_pos, |t| t.pos)
    }

    fn found(&self) -> String {
        self.peek().map_or_else(|| "end of input".to_string(), |t| t.tok.describe())
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        ParseError {
            position: self.pos(),
            kind: ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.found(),
            },
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn parse_filter(mut self) -> Result<FilterExpr, ParseError> {
        let predicate = if self.peek().is_none() || self.is_kw("ORDER") || self.is_kw("LIMIT") {
            None
        } else {
            Some(self.parse_or()?)
        };
        let order_by = if self.eat_kw("ORDER") {
            if !self.eat_kw("BY") {
                return Err(self.err(&["BY"]));
            }
            let pos = self.pos();
            let field = self.field()?;
            if !field.sortable() {
                return Err(ParseError {
                    position: pos,
                    kind: ParseErrorKind::TypeMismatch {
                        field: field.as_str().into(),
                        detail: "field cannot be used in ORDER BY".into(),
                    },
                });
            }
            let dir = if self.eat_kw("DESC") {
                SortDir::Desc
            } else {
                self.eat_kw("ASC");
                SortDir::Asc
            };
            Some(OrderBy { field, dir })
        } else {
            None
        };
        let limit = if self.eat_kw("LIMIT") {
            match self.peek() {
                Some(Spanned { tok: Tok::Num { integer: Some(n), .. }, .. }) => {
                    let n = usize::try_from(*n).map_err(|_| self.err(&["non-negative integer"]))?;
                    self.at += 1;
                    Some(n)
                }
                _ => return Err(self.err(&["non-negative integer"])),
            }
        } else {
            None
        };
        if self.peek().is_some() {
            let mut expected = vec!["end of input"];
            if predicate.is_some() && order_by.is_none() && limit.is_none() {
                expected.extend(["AND", "OR"]);
            }
            if order_by.is_none() && limit.is_none() {
                expected.push("ORDER BY");
            }
            if limit.is_none() {
                expected.push("LIMIT");
            }
            return Err(self.err(&expected));
        }
        Ok(FilterExpr { predicate, order_by, limit })
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_and()?;
        while self.eat_kw("OR") {
            let rhs = self.parse_and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_not()?;
        while self.eat_kw("AND") {
            let rhs = self.parse_not()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("NOT") {
            Ok(Expr::Not(Box::new(self.parse_prim()?)))
        } else {
            self.parse_prim()
        }
    }

    fn parse_prim(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Spanned { tok: Tok::LParen, .. })) {
            if self.depth >= MAX_NESTING {
                return Err(ParseError { position: self.pos(), kind: ParseErrorKind::TooDeep });
            }
            self.at += 1;
            self.depth += 1;
            let inner = self.parse_or()?;
            self.depth -= 1;
            if !matches!(self.peek(), Some(Spanned { tok: Tok::RParen, .. })) {
                return Err(self.err(&["`)`", "AND", "OR"]));
            }
            self.at += 1;
            return Ok(inner);
        }
        let field_pos = self.pos();
        let field = self.field()?;
        if self.eat_kw("HAS") {
            let lit_pos = self.pos();
            let Some(Spanned { tok: Tok::Str(s), .. }) = self.peek().cloned() else {
                return Err(self.err(&["string"]));
            };
            self.at += 1;
            if field != Field::Activities {
                return Err(mismatch(field_pos, field, "HAS applies only to activities"));
            }
            let activity: Activity = s.parse().map_err(|e| mismatch(lit_pos, field, &format!("{e}")))?;
            return Ok(Expr::Has(activity));
        }
        let op = match self.peek() {
            Some(Spanned { tok: Tok::Op(op), .. }) => *op,
            _ => {
                let expected: &[&str] = if field == Field::Activities { &["HAS"] } else { &["comparison operator"] };
                return Err(self.err(expected));
            }
        };
        let op_pos = self.pos();
        self.at += 1;
        let lit_pos = self.pos();
        let lit = match self.peek().map(|t| t.tok.clone()) {
            Some(t @ (Tok::Str(_) | Tok::Num { .. })) => t,
            _ => return Err(self.err(&["string", "number"])),
        };
        self.at += 1;
        let value = typecheck(field, op, op_pos, lit, lit_pos)?;
        Ok(Expr::Cmp { field, op, value })
    }

    fn field(&mut self) -> Result<Field, ParseError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Ident(w), pos }) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => {
                let (w, pos) = (w.clone(), *pos);
                let field = Field::from_name(&w)
                    .ok_or(ParseError { position: pos, kind: ParseErrorKind::UnknownField { name: w } })?;
                self.at += 1;
                Ok(field)
            }
            _ => Err(self.err(&["field", "`(`", "NOT"])),
        }
    }
}

fn mismatch(pos: usize, field: Field, detail: &str) -> ParseError {
    ParseError {
        position: pos,
        kind: ParseErrorKind::TypeMismatch { field: field.as_str().into(), detail: detail.into() },
    }
}

fn typecheck(field: Field, op: CmpOp, op_pos: usize, lit: Tok, lit_pos: usize) -> Result<Literal, ParseError> {
    if !matches!(op, CmpOp::Eq | CmpOp::Ne) && !field.ordered() {
        return Err(mismatch(op_pos, field, &format!("operator `{}` is not defined", op.as_str())));
    }
    match (field.kind(), lit) {
        (FieldKind::Number, Tok::Num { value, .. }) => Ok(Literal::Number(value)),
        (FieldKind::Text, Tok::Str(s)) => Ok(Literal::Text(s)),
        (FieldKind::Difficulty, Tok::Str(s)) => {
            s.parse::<Difficulty>().map(Literal::Difficulty).map_err(|e| mismatch(lit_pos, field, &e.to_string()))
        }
        (FieldKind::TriState, Tok::Str(s)) => {
            s.parse::<TriState>().map(Literal::Tri).map_err(|e| mismatch(lit_pos, field, &e.to_string()))
        }
        (FieldKind::ActivitySet, _) => Err(mismatch(op_pos, field, "use `activities HAS \"...\"`")),
        (FieldKind::Number, _) => Err(mismatch(lit_pos, field, "expected a number")),
        (_, _) => Err(mismatch(lit_pos, field, "expected a quoted string")),
    }
}
