use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use crate::embedding::EmbeddingVector;
use crate::llm::Turn;

pub const DEFAULT_HISTORY_TURNS: usize = 20;
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(3600);
const MEMO_CAPACITY: usize = 64;

/// Per-conversation state. Callers serialize access (one answer at a time).
#[derive(Debug)]
pub struct SessionState {
    pub session_id: String,
    pub created_at: DateTime<Utc>,
    history: VecDeque<Turn>,
    max_turns: usize,
    query_vectors: HashMap<String, EmbeddingVector>,
}

impl SessionState {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self::with_history_limit(session_id, DEFAULT_HISTORY_TURNS)
    }

    pub fn with_history_limit(session_id: impl Into<String>, max_turns: usize) -> Self {
        Self {
            session_id: session_id.into(),
            created_at: Utc::now(),
            history: VecDeque::new(),
            max_turns,
            query_vectors: HashMap::new(),
        }
    }

    pub fn history(&self) -> Vec<Turn> {
        self.history.iter().cloned().collect()
    }

    /// Append a turn, dropping the oldest beyond the limit.
    pub fn push(&mut self, turn: Turn) {
        self.history.push_back(turn);
        while self.history.len() > self.max_turns {
            self.history.pop_front();
        }
    }

    pub(crate) fn memo(&self, key: &str) -> Option<&EmbeddingVector> {
        self.query_vectors.get(key)
    }

    pub(crate) fn remember(&mut self, key: String, v: EmbeddingVector) {
        if self.query_vectors.len() >= MEMO_CAPACITY {
            self.query_vectors.clear();
        }
        self.query_vectors.insert(key, v);
    }
}

struct Held {
    state: Arc<Mutex<SessionState>>,
    last_used: Instant,
}

/// In-memory sessions with idle expiry.
pub struct SessionManager {
    sessions: Mutex<HashMap<String, Held>>,
    ttl: Duration,
    history_turns: usize,
}

impl SessionManager {
    pub fn new(ttl: Duration, history_turns: usize) -> Self {
        Self { sessions: Mutex::new(HashMap::new()), ttl, history_turns }
    }

    /// The session for `id`, created when absent or expired. A missing id
    /// gets a fresh random one.
    pub fn get_or_create(&self, id: Option<&str>) -> (String, Arc<Mutex<SessionState>>) {
        let mut map = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        map.retain(|_, h| now.duration_since(h.last_used) < self.ttl);
        let id = id.map_or_else(|| uuid::Uuid::new_v4().to_string(), str::to_string);
        let held = map.entry(id.clone()).or_insert_with(|| Held {
            state: Arc::new(Mutex::new(SessionState::with_history_limit(id.clone(), self.history_turns))),
            last_used: now,
        });
        held.last_used = now;
        (id, Arc::clone(&held.state))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(DEFAULT_SESSION_TTL, DEFAULT_HISTORY_TURNS)
    }
}
