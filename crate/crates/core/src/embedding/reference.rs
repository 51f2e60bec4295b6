use std::sync::atomic::{AtomicU64, Ordering};

use super::{BackendIdentity, BackendKind, EmbedError, Embedder, EmbeddingVector};

pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_SEED: u64 = 0x7261_696c_7261_6731;
const WORD_WEIGHT: f64 = 2.0;

/// Offline embedder: signed feature hashing of words and their character
/// trigrams.
///
/// The text is lowercased and split into alphanumeric words. Each word
/// contributes its space-padded trigrams and, with a larger weight, itself;
/// every feature hashes to a bucket (high bits) and a sign (low bit). Texts
/// that share more words and word fragments get a higher cosine. Output
/// depends only on `(seed, dim, text)`.
pub struct ReferenceEmbedder {
    dim: usize,
    seed: u64,
    calls: AtomicU64,
}

impl Default for ReferenceEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIM, DEFAULT_SEED)
    }
}

impl ReferenceEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim, seed, calls: AtomicU64::new(0) }
    }

    fn hash(&self, tri: &[char]) -> u64 {
        // FNV-1a over the UTF-8 bytes, then a splitmix64 finalizer.
        let mut h = 0xcbf2_9ce4_8422_2325u64 ^ self.seed;
        let mut buf = [0u8; 4];
        for c in tri {
            for b in c.encode_utf8(&mut buf).bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^ (h >> 31)
    }

    fn add(&self, acc: &mut [f64], feature: &[char], weight: f64) {
        let h = self.hash(feature);
        let bucket = ((h >> 1) % self.dim as u64) as usize;
        acc[bucket] += if h & 1 == 0 { weight } else { -weight };
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let lower: String = text.chars().flat_map(char::to_lowercase).collect();
        let mut acc = vec![0.0f64; self.dim];
        for word in lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
            let padded: Vec<char> = std::iter::once(' ').chain(word.chars()).chain(std::iter::once(' ')).collect();
            for tri in padded.windows(3) {
                self.add(&mut acc, tri, 1.0);
            }
            // the whole word, marked so it cannot collide with a trigram
            let token: Vec<char> = std::iter::once('\u{1}').chain(word.chars()).collect();
            self.add(&mut acc, &token, WORD_WEIGHT);
        }
        EmbeddingVector::normalize(acc).unwrap_or_else(|_| {
            // No words, or every feature cancelled out; fall back to one
            // bucket chosen by the whole text so the result is still
            // deterministic.
            let chars: Vec<char> = lower.chars().collect();
            let h = self.hash(&chars);
            let mut v = vec![0.0; self.dim];
            v[((h >> 1) % self.dim as u64) as usize] = 1.0;
            EmbeddingVector::normalize(v).expect("one-hot is non-zero")
        })
    }
}

impl Embedder for ReferenceEmbedder {
    fn identity(&self) -> BackendIdentity {
        BackendIdentity {
            kind: BackendKind::ReferenceHash,
            model: format!("word-trigram-hash/{:016x}", self.seed),
            dim: self.dim,
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        self.calls.fetch_add(texts.len() as u64, Ordering::Relaxed);
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
