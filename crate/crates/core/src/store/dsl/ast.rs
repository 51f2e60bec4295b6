use std::cmp::Ordering;
use std::fmt;

use crate::store::{Activity, Difficulty, TrailRecord, TriState};

/// Trail attributes visible to filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Name,
    Town,
    LengthMiles,
    Difficulty,
    Activities,
    PetsAllowed,
    WheelchairAccessible,
    Description,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Text,
    Number,
    Difficulty,
    TriState,
    ActivitySet,
}

impl Field {
    pub const ALL: &'static [Field] = &[
        Field::Name,
        Field::Town,
        Field::LengthMiles,
        Field::Difficulty,
        Field::Activities,
        Field::PetsAllowed,
        Field::WheelchairAccessible,
        Field::Description,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Name => "name",
            Field::Town => "town",
            Field::LengthMiles => "length_miles",
            Field::Difficulty => "difficulty",
            Field::Activities => "activities",
            Field::PetsAllowed => "pets_allowed",
            Field::WheelchairAccessible => "wheelchair_accessible",
            Field::Description => "description",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL.iter().copied().find(|f| f.as_str() == name)
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::Name | Field::Town | Field::Description => FieldKind::Text,
            Field::LengthMiles => FieldKind::Number,
            Field::Difficulty => FieldKind::Difficulty,
            Field::Activities => FieldKind::ActivitySet,
            Field::PetsAllowed | Field::WheelchairAccessible => FieldKind::TriState,
        }
    }

    /// Whether `ORDER BY` accepts the field.
    pub fn sortable(self) -> bool {
        matches!(self.kind(), FieldKind::Text | FieldKind::Number | FieldKind::Difficulty)
    }

    /// Whether `<`, `<=`, `>`, `>=` are meaningful on the field.
    pub fn ordered(self) -> bool {
        matches!(self.kind(), FieldKind::Number | FieldKind::Difficulty)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Names of all filterable fields, for prompts and the router.
pub fn schema_fields() -> Vec<&'static str> {
    Field::ALL.iter().map(|f| f.as_str()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

/// A type-checked literal; the variant always matches its field's kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
    Difficulty(Difficulty),
    Tri(TriState),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Cmp { field: Field, op: CmpOp, value: Literal },
    Has(Activity),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortDir {
    Asc,
    Desc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderBy {
    pub field: Field,
    pub dir: SortDir,
}

/// A parsed filter. `predicate == None` matches every trail.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FilterExpr {
    pub predicate: Option<Expr>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

impl FilterExpr {
    pub fn match_all() -> Self {
        Self::default()
    }

    pub fn matches(&self, trail: &TrailRecord) -> bool {
        self.predicate.as_ref().is_none_or(|p| p.matches(trail))
    }

    /// Sort rows per `order_by`, ties (and the default) by name.
    pub fn sort(&self, rows: &mut [TrailRecord]) {
        rows.sort_by(|a, b| {
            let primary = match self.order_by {
                Some(OrderBy { field, dir }) => {
                    let o = compare_field(field, a, b);
                    if dir == SortDir::Desc {
                        o.reverse()
                    } else {
                        o
                    }
                }
                None => Ordering::Equal,
            };
            primary.then_with(|| a.name.cmp(&b.name))
        });
    }
}

fn compare_field(field: Field, a: &TrailRecord, b: &TrailRecord) -> Ordering {
    match field {
        Field::Name => a.name.cmp(&b.name),
        Field::Town => a.town.cmp(&b.town),
        Field::Description => a.description.cmp(&b.description),
        Field::LengthMiles => a.length_miles.total_cmp(&b.length_miles),
        Field::Difficulty => a.difficulty.cmp(&b.difficulty),
        Field::Activities | Field::PetsAllowed | Field::WheelchairAccessible => Ordering::Equal,
    }
}

impl Expr {
    pub fn matches(&self, t: &TrailRecord) -> bool {
        match self {
            Expr::And(a, b) => a.matches(t) && b.matches(t),
            Expr::Or(a, b) => a.matches(t) || b.matches(t),
            Expr::Not(e) => !e.matches(t),
            Expr::Has(activity) => t.activities.contains(activity),
            Expr::Cmp { field, op, value } => {
                let ord = match (field, value) {
                    (Field::Name, Literal::Text(s)) => cmp_text(&t.name, s),
                    (Field::Town, Literal::Text(s)) => cmp_text(&t.town, s),
                    (Field::Description, Literal::Text(s)) => cmp_text(&t.description, s),
                    (Field::LengthMiles, Literal::Number(n)) => t.length_miles.partial_cmp(n).unwrap_or(Ordering::Less),
                    (Field::Difficulty, Literal::Difficulty(d)) => t.difficulty.cmp(d),
                    (Field::PetsAllowed, Literal::Tri(v)) => t.pets_allowed.cmp(v),
                    (Field::WheelchairAccessible, Literal::Tri(v)) => t.wheelchair_accessible.cmp(v),
                    // The parser never builds a mistyped comparison.
                    _ => return false,
                };
                op.holds(ord)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Cmp { .. } | Expr::Has(_) => 4,
        }
    }
}

/// Text equality is case-insensitive; text fields only admit `=` and `!=`.
fn cmp_text(a: &str, b: &str) -> Ordering {
    if a.to_lowercase() == b.to_lowercase() {
        Ordering::Equal
    } else {
        Ordering::Less
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // f64 Display is the shortest string that parses back exactly.
            Literal::Number(n) => write!(f, "{n}"),
            Literal::Text(s) => f.write_str(&quote(s)),
            Literal::Difficulty(d) => f.write_str(&quote(d.as_str())),
            Literal::Tri(v) => f.write_str(&quote(v.as_str())),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Binary operators parse left-associatively, so a right child of
            // equal precedence needs parentheses to survive a re-parse.
            Expr::And(a, b) | Expr::Or(a, b) => {
                let p = self.precedence();
                let kw = if matches!(self, Expr::And(..)) { "AND" } else { "OR" };
                write_child(f, a, a.precedence() < p)?;
                write!(f, " {kw} ")?;
                write_child(f, b, b.precedence() <= p)
            }
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                write_child(f, e, e.precedence() <= 3)
            }
            Expr::Cmp { field, op, value } => write!(f, "{field} {} {value}", op.as_str()),
            Expr::Has(a) => write!(f, "activities HAS {}", quote(a.as_str())),
        }
    }
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = &self.predicate {
            parts.push(p.to_string());
        }
        if let Some(o) = self.order_by {
            let dir = if o.dir == SortDir::Asc { "ASC" } else { "DESC" };
            parts.push(format!("ORDER BY {} {dir}", o.field));
        }
        if let Some(l) = self.limit {
            parts.push(format!("LIMIT {l}"));
        }
        f.write_str(&parts.join(" "))
    }
}
