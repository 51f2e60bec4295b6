use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::index::RetrievalHit;
use crate::store::{Review, ReviewId, TrailId, TrailRecord};

pub const DEFAULT_PROMPT_LIMIT: usize = 8000;
pub const NO_TRAILS: &str = "no matching trails";
pub const NO_REVIEWS: &str = "no reviews available";

const STRUCTURED_SYSTEM: &str = "You answer questions about hiking trails. \
Use only the trail rows in the context. Each row starts with a [trail:ID] marker. \
If the context says there are no matching trails, say so.";

const RECOMMEND_SYSTEM: &str = "You recommend hiking trails. \
Pick from the trail rows in the context only, explain briefly why each pick fits the \
user's request and any preferences stated earlier in the conversation.";

const RAG_SYSTEM: &str = "You answer questions about a trail from visitor reviews. \
Use only the reviews in the context and cite them with their [review:ID] markers. \
If the context says no reviews are available, say so.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

/// Where a prompt's context came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    None,
    Structured {
        trail_ids: Vec<TrailId>,
    },
    Reviews {
        trail_id: TrailId,
        review_ids: Vec<ReviewId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub context: String,
    pub question: String,
    pub history: Vec<Turn>,
    pub provenance: Provenance,
}

impl PromptBundle {
    /// Size in characters, the unit of the prompt limit.
    pub fn size(&self) -> usize {
        self.system.chars().count()
            + self.context.chars().count()
            + self.question.chars().count()
            + self.history.iter().map(|t| t.text.chars().count()).sum::<usize>()
    }

    /// Ordered chat messages: system (with context), history, question.
    pub fn messages(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("system", format!("{}\n\nContext:\n{}", self.system, self.context))];
        for t in &self.history {
            out.push((if t.role == Role::User { "user" } else { "assistant" }, t.text.clone()));
        }
        out.push(("user", self.question.clone()));
        out
    }
}

/// One context line plus the id it cites.
struct Item<I> {
    id: I,
    line: String,
}

fn clip(s: &mut String, chars: usize) {
    if let Some((at, _)) = s.char_indices().nth(chars) {
        s.truncate(at);
    }
}

/// Assemble a bundle no larger than `limit`, dropping the oldest history
/// first, then the lowest-ranked items (last in `items`), then clipping
/// the question, context and system text.
fn fit<I: Copy>(
    system: &str,
    items: Vec<Item<I>>,
    empty_sentinel: &str,
    noun: &str,
    question: &str,
    history: &[Turn],
    limit: usize,
) -> (PromptBundle, Vec<I>) {
    let render = |items: &[Item<I>], omitted: usize| {
        if items.is_empty() && omitted == 0 {
            return empty_sentinel.to_string();
        }
        let mut ctx = String::new();
        for it in items {
            ctx.push_str(&it.line);
            ctx.push('\n');
        }
        if omitted > 0 {
            let _ = writeln!(ctx, "({omitted} more {noun} omitted)");
        }
        ctx
    };
    let total = items.len();
    let mut items = items;
    let mut bundle = PromptBundle {
        system: system.to_string(),
        context: render(&items, 0),
        question: question.to_string(),
        history: history.to_vec(),
        provenance: Provenance::None,
    };
    while bundle.size() > limit && !bundle.history.is_empty() {
        bundle.history.remove(0);
    }
    while bundle.size() > limit && !items.is_empty() {
        items.pop();
        bundle.context = render(&items, total - items.len());
    }
    let mut over = bundle.size().saturating_sub(limit);
    for part in [&mut bundle.question, &mut bundle.context, &mut bundle.system] {
        if over == 0 {
            break;
        }
        let len = part.chars().count();
        let cut = over.min(len);
        clip(part, len - cut);
        over -= cut;
    }
    let ids = items.iter().map(|it| it.id).collect();
    (bundle, ids)
}

fn tri(t: crate::store::TriState) -> &'static str {
    t.as_str()
}

/// Stable single-line rendering of a trail row.
pub fn render_trail_row(t: &TrailRecord) -> String {
    let activities: Vec<&str> = t.activities.iter().map(|a| a.as_str()).collect();
    let mut line = format!(
        "[trail:{}] {} | town: {} | length: {} mi | difficulty: {} | activities: {} | pets: {} | wheelchair: {}",
        t.id,
        t.name,
        t.town,
        t.length_miles,
        t.difficulty,
        activities.join(", "),
        tri(t.pets_allowed),
        tri(t.wheelchair_accessible),
    );
    if !t.description.is_empty() {
        line.push_str(" | ");
        line.push_str(&t.description);
    }
    line
}

pub fn render_review(r: &Review) -> String {
    format!("[review:{}] {}", r.id, r.text)
}

fn structured(system: &str, rows: &[TrailRecord], question: &str, history: &[Turn], limit: usize) -> PromptBundle {
    let items = rows.iter().map(|t| Item { id: t.id, line: render_trail_row(t) }).collect();
    let (mut bundle, trail_ids) = fit(system, items, NO_TRAILS, "rows", question, history, limit);
    bundle.provenance = Provenance::Structured { trail_ids };
    bundle
}

/// Prompt over filter results, rows kept in the order given.
pub fn build_structured_prompt(rows: &[TrailRecord], question: &str, history: &[Turn], limit: usize) -> PromptBundle {
    structured(STRUCTURED_SYSTEM, rows, question, history, limit)
}

/// Structured prompt with the recommendation instruction.
pub fn build_recommendation_prompt(
    rows: &[TrailRecord],
    question: &str,
    history: &[Turn],
    limit: usize,
) -> PromptBundle {
    structured(RECOMMEND_SYSTEM, rows, question, history, limit)
}

fn reviews_prompt<'a>(
    trail_id: TrailId,
    ordered: impl Iterator<Item = &'a Review>,
    question: &str,
    history: &[Turn],
    limit: usize,
) -> PromptBundle {
    let items = ordered.map(|r| Item { id: r.id, line: render_review(r) }).collect();
    let (mut bundle, review_ids) = fit(RAG_SYSTEM, items, NO_REVIEWS, "reviews", question, history, limit);
    bundle.provenance = Provenance::Reviews { trail_id, review_ids };
    bundle
}

/// Prompt over retrieved reviews in hit order. Hits whose review is not in
/// `reviews` are skipped.
pub fn build_rag_prompt(
    trail_id: TrailId,
    hits: &[RetrievalHit],
    reviews: &[Review],
    question: &str,
    history: &[Turn],
    limit: usize,
) -> PromptBundle {
    let ordered = hits.iter().filter_map(|h| reviews.iter().find(|r| r.id == h.review_id));
    reviews_prompt(trail_id, ordered, question, history, limit)
}

/// Prompt over every review of a trail in id order, without selection.
pub fn build_all_reviews_prompt(
    trail_id: TrailId,
    reviews: &[Review],
    question: &str,
    history: &[Turn],
    limit: usize,
) -> PromptBundle {
    reviews_prompt(trail_id, reviews.iter(), question, history, limit)
}
