//! Random trail stores and filter trees, with a direct evaluator used as the
//! oracle for `exec_filter`. Nothing here calls into the filter engine.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use trailrag_core::store::{Activity, Difficulty, TrailRecord, TrailStore, TriState};

const NAMES: &[&str] = &[
    "Oak Hollow Loop",
    "Ridge Run",
    "Mill Brook Path",
    "Cedar Point Trail",
    "Lantern Hill",
    "Quarry Rail Trail",
    "Salmon River Walk",
    "Hop Brook Greenway",
    "North Summit",
    "Beaver Pond Loop",
    "Old Canal Towpath",
    "Sunset \"Overlook\" Trail",
    "Back\\Slash Spur",
    "Éclair Ridge",
];
const TOWNS: &[&str] = &["Windsor", "windsor", "Hebron", "East Hampton", "Ledyard", "Salem"];
const DESCRIPTIONS: &[&str] = &["", "Shaded and flat.", "Steep climb to a view.", "shaded and flat."];
const LENGTHS: &[f64] = &[0.5, 1.0, 2.5, 2.5, 3.0, 4.5, 7.25, 12.0];

fn pick<'a, T: ?Sized, R: Rng>(rng: &mut R, xs: &'a [&'a T]) -> &'a T {
    xs.choose(rng).unwrap()
}

fn tri<R: Rng>(rng: &mut R) -> TriState {
    *TriState::ALL.choose(rng).unwrap()
}

pub fn random_trails<R: Rng>(rng: &mut R) -> Vec<TrailRecord> {
    let n = rng.gen_range(0..=NAMES.len());
    let mut names: Vec<&str> = NAMES.to_vec();
    names.shuffle(rng);
    names
        .into_iter()
        .take(n)
        .map(|name| {
            let mut activities = BTreeSet::new();
            while activities.is_empty() {
                for a in Activity::ALL {
                    if rng.gen_bool(0.4) {
                        activities.insert(*a);
                    }
                }
            }
            let length_miles =
                if rng.gen_bool(0.7) { *LENGTHS.choose(rng).unwrap() } else { rng.gen_range(1..2000) as f64 / 100.0 };
            TrailRecord {
                id: Default::default(),
                name: name.to_string(),
                town: pick(rng, TOWNS).to_string(),
                length_miles,
                difficulty: *Difficulty::ALL.choose(rng).unwrap(),
                activities,
                pets_allowed: tri(rng),
                wheelchair_accessible: tri(rng),
                description: pick(rng, DESCRIPTIONS).to_string(),
            }
        })
        .collect()
}

pub fn store_of(trails: &[TrailRecord]) -> TrailStore {
    let store = TrailStore::in_memory();
    for t in trails {
        store.upsert_trail(t.clone()).expect("valid generated trail");
    }
    store
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Op {
    fn spellings(self) -> &'static [&'static str] {
        match self {
            Op::Eq => &["="],
            Op::Ne => &["!=", "<>", "≠"],
            Op::Lt => &["<"],
            Op::Le => &["<=", "≤"],
            Op::Gt => &[">"],
            Op::Ge => &[">=", "≥"],
        }
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            Op::Eq => o.is_eq(),
            Op::Ne => o.is_ne(),
            Op::Lt => o.is_lt(),
            Op::Le => o.is_le(),
            Op::Gt => o.is_gt(),
            Op::Ge => o.is_ge(),
        }
    }
}

const ALL_OPS: &[Op] = &[Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge];

#[derive(Clone, Copy, Debug)]
pub enum TextField {
    Name,
    Town,
    Description,
}

#[derive(Clone, Copy, Debug)]
pub enum TriField {
    Pets,
    Wheelchair,
}

#[derive(Clone, Debug)]
pub enum Tree {
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
    Not(Box<Tree>),
    Text(TextField, bool, String),
    Length(Op, f64),
    Diff(Op, Difficulty),
    Tri(TriField, bool, TriState),
    Has(Activity),
}

#[derive(Clone, Copy, Debug)]
pub enum SortKey {
    Name,
    Town,
    Description,
    Length,
    Difficulty,
}

#[derive(Clone, Debug)]
pub struct Query {
    pub tree: Option<Tree>,
    pub order: Option<(SortKey, Option<bool>)>,
    pub limit: Option<usize>,
}

fn recase<R: Rng>(rng: &mut R, s: &str) -> String {
    match rng.gen_range(0..4) {
        0 => s.to_uppercase(),
        1 => s.to_lowercase(),
        _ => s.to_string(),
    }
}

fn text_value<R: Rng>(rng: &mut R, field: TextField) -> String {
    let base = match field {
        TextField::Name => pick(rng, NAMES),
        TextField::Town => pick(rng, TOWNS),
        TextField::Description => pick(rng, DESCRIPTIONS),
    };
    if rng.gen_bool(0.1) {
        return "no such value".into();
    }
    recase(rng, base)
}

fn leaf<R: Rng>(rng: &mut R) -> Tree {
    match rng.gen_range(0..5) {
        0 => {
            let field = *[TextField::Name, TextField::Town, TextField::Description].choose(rng).unwrap();
            Tree::Text(field, rng.gen_bool(0.7), text_value(rng, field))
        }
        1 => {
            let v = if rng.gen_bool(0.6) {
                *LENGTHS.choose(rng).unwrap()
            } else {
                rng.gen_range(-100..3000) as f64 / 100.0
            };
            Tree::Length(*ALL_OPS.choose(rng).unwrap(), v)
        }
        2 => Tree::Diff(*ALL_OPS.choose(rng).unwrap(), *Difficulty::ALL.choose(rng).unwrap()),
        3 => Tree::Tri(*[TriField::Pets, TriField::Wheelchair].choose(rng).unwrap(), rng.gen_bool(0.7), tri(rng)),
        _ => Tree::Has(*Activity::ALL.choose(rng).unwrap()),
    }
}

pub fn random_tree<R: Rng>(rng: &mut R, depth: u32) -> Tree {
    if depth == 0 || rng.gen_bool(0.35) {
        return leaf(rng);
    }
    match rng.gen_range(0..3) {
        0 => Tree::And(Box::new(random_tree(rng, depth - 1)), Box::new(random_tree(rng, depth - 1))),
        1 => Tree::Or(Box::new(random_tree(rng, depth - 1)), Box::new(random_tree(rng, depth - 1))),
        _ => Tree::Not(Box::new(random_tree(rng, depth - 1))),
    }
}

pub fn random_query<R: Rng>(rng: &mut R) -> Query {
    let keys = [SortKey::Name, SortKey::Town, SortKey::Description, SortKey::Length, SortKey::Difficulty];
    Query {
        tree: rng.gen_bool(0.9).then(|| random_tree(rng, 4)),
        order: rng
            .gen_bool(0.5)
            .then(|| (*keys.choose(rng).unwrap(), [None, Some(true), Some(false)].choose(rng).copied().unwrap())),
        limit: rng.gen_bool(0.3).then(|| rng.gen_range(0..8)),
    }
}

fn quote(s: &str) -> String {
    let escaped: String = s.chars().flat_map(|c| if c == '"' || c == '\\' { vec!['\\', c] } else { vec![c] }).collect();
    format!("\"{escaped}\"")
}

fn kw<R: Rng>(rng: &mut R, word: &str) -> String {
    recase(rng, word)
}

fn op_text<R: Rng>(rng: &mut R, op: Op) -> &'static str {
    op.spellings().choose(rng).unwrap()
}

/// Fully parenthesized text, with random keyword case and operator spelling.
pub fn render_tree<R: Rng>(rng: &mut R, t: &Tree) -> String {
    match t {
        Tree::And(a, b) => {
            let (a, b) = (render_tree(rng, a), render_tree(rng, b));
            format!("({a}) {} ({b})", kw(rng, "AND"))
        }
        Tree::Or(a, b) => {
            let (a, b) = (render_tree(rng, a), render_tree(rng, b));
            format!("({a}) {} ({b})", kw(rng, "OR"))
        }
        Tree::Not(a) => {
            let a = render_tree(rng, a);
            format!("{} ({a})", kw(rng, "NOT"))
        }
        Tree::Text(f, eq, v) => {
            let name = match f {
                TextField::Name => "name",
                TextField::Town => "town",
                TextField::Description => "description",
            };
            format!("{name} {} {}", op_text(rng, if *eq { Op::Eq } else { Op::Ne }), quote(v))
        }
        Tree::Length(op, v) => format!("length_miles {} {v}", op_text(rng, *op)),
        Tree::Diff(op, d) => format!("difficulty {} {}", op_text(rng, *op), quote(&recase(rng, d.as_str()))),
        Tree::Tri(f, eq, v) => {
            let name = match f {
                TriField::Pets => "pets_allowed",
                TriField::Wheelchair => "wheelchair_accessible",
            };
            format!("{name} {} {}", op_text(rng, if *eq { Op::Eq } else { Op::Ne }), quote(v.as_str()))
        }
        Tree::Has(a) => format!("activities {} {}", kw(rng, "HAS"), quote(a.as_str())),
    }
}

pub fn render<R: Rng>(rng: &mut R, q: &Query) -> String {
    let mut parts = Vec::new();
    if let Some(t) = &q.tree {
        parts.push(render_tree(rng, t));
    }
    if let Some((key, dir)) = q.order {
        let field = match key {
            SortKey::Name => "name",
            SortKey::Town => "town",
            SortKey::Description => "description",
            SortKey::Length => "length_miles",
            SortKey::Difficulty => "difficulty",
        };
        let mut s = format!("{} {} {field}", kw(rng, "ORDER"), kw(rng, "BY"));
        if let Some(asc) = dir {
            s.push(' ');
            s.push_str(&kw(rng, if asc { "ASC" } else { "DESC" }));
        }
        parts.push(s);
    }
    if let Some(l) = q.limit {
        parts.push(format!("{} {l}", kw(rng, "LIMIT")));
    }
    parts.join(" ")
}

fn effort(d: Difficulty) -> u8 {
    match d {
        Difficulty::Easy => 0,
        Difficulty::Moderate => 1,
        Difficulty::Difficult => 2,
    }
}

pub fn eval(t: &Tree, r: &TrailRecord) -> bool {
    match t {
        Tree::And(a, b) => eval(a, r) && eval(b, r),
        Tree::Or(a, b) => eval(a, r) || eval(b, r),
        Tree::Not(a) => !eval(a, r),
        Tree::Text(f, eq, v) => {
            let field = match f {
                TextField::Name => &r.name,
                TextField::Town => &r.town,
                TextField::Description => &r.description,
            };
            (field.to_lowercase() == v.to_lowercase()) == *eq
        }
        Tree::Length(op, v) => op.holds(r.length_miles.partial_cmp(v).unwrap()),
        Tree::Diff(op, d) => op.holds(effort(r.difficulty).cmp(&effort(*d))),
        Tree::Tri(f, eq, v) => {
            let field = match f {
                TriField::Pets => r.pets_allowed,
                TriField::Wheelchair => r.wheelchair_accessible,
            };
            (field.as_str() == v.as_str()) == *eq
        }
        Tree::Has(a) => r.activities.iter().any(|x| x == a),
    }
}

/// Names of the rows `q` should return from `trails`.
pub fn oracle(q: &Query, trails: &[TrailRecord]) -> Vec<String> {
    let mut rows: Vec<&TrailRecord> = trails.iter().filter(|r| q.tree.as_ref().is_none_or(|t| eval(t, r))).collect();
    rows.sort_by(|a, b| {
        let primary = match q.order {
            None => Ordering::Equal,
            Some((key, dir)) => {
                let o = match key {
                    SortKey::Name => a.name.cmp(&b.name),
                    SortKey::Town => a.town.cmp(&b.town),
                    SortKey::Description => a.description.cmp(&b.description),
                    SortKey::Length => a.length_miles.partial_cmp(&b.length_miles).unwrap(),
                    SortKey::Difficulty => effort(a.difficulty).cmp(&effort(b.difficulty)),
                };
                if dir == Some(false) {
                    o.reverse()
                } else {
                    o
                }
            }
        };
        primary.then_with(|| a.name.cmp(&b.name))
    });
    let mut names: Vec<String> = rows.into_iter().map(|r| r.name.clone()).collect();
    if let Some(l) = q.limit {
        names.truncate(l);
    }
    names
}
