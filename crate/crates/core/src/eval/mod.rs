//! Answer-matching evaluation and the k sweep.
//!
//! An answer is correct when the cosine between its embedding and the
//! ground truth's, clamped to `[0, 1]`, reaches the threshold. The
//! evaluation embedder must differ from the retrieval embedder.

use std::fmt::Write as _;
use std::io::Read;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{embed, EmbedError, Embedder};
use crate::ingest::{parse_jsonl, IngestError};
use crate::orchestrator::{AnswerOptions, Engine, SessionState};
use crate::router::RouteKind;

pub const DEFAULT_THRESHOLD: f64 = 0.70;
/// Seed of the default evaluation embedder; distinct from retrieval.
pub const EVAL_EMBEDDER_SEED: u64 = 0x6576_616c_7561_7465;
pub const EVAL_EMBEDDER_DIM: usize = 512;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty fixture")]
    EmptyFixture,
    #[error("no k values to sweep")]
    EmptySweep,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("threshold must be within [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("case {id}: ground truth is empty")]
    EmptyGroundTruth { id: String },
    #[error(transparent)]
    Fixture(#[from] IngestError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCase {
    pub id: String,
    pub question: String,
    pub ground_truth: String,
    pub expected_route: RouteKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trail_ref: Option<String>,
}

pub fn parse_cases(reader: impl Read, file: &str) -> Result<Vec<EvalCase>, EvalError> {
    let cases: Vec<EvalCase> = parse_jsonl(reader, file)?.into_iter().map(|(_, c)| c).collect();
    if let Some(c) = cases.iter().find(|c| c.ground_truth.trim().is_empty()) {
        return Err(EvalError::EmptyGroundTruth { id: c.id.clone() });
    }
    Ok(cases)
}

/// Clamped cosine similarity of the two texts under `backend`.
pub fn match_score(generated: &str, truth: &str, backend: &dyn Embedder) -> Result<f64, EmbedError> {
    let a = embed(backend, generated)?;
    let b = embed(backend, truth)?;
    Ok(a.dot(&b).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub k: usize,
    pub rag_enabled: bool,
    pub threshold: f64,
    /// Run cases on all cores; latency is then not reported.
    pub parallel: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { k: 5, rag_enabled: true, threshold: DEFAULT_THRESHOLD, parallel: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub score: f64,
    pub correct: bool,
    pub latency_ms: Option<f64>,
    pub route: Option<RouteKind>,
    pub expected_route: RouteKind,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub case_count: usize,
    pub correct_count: usize,
    pub matching_pct: f64,
    pub mean_latency_ms: Option<f64>,
    pub p95_latency_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub k: usize,
    pub rag_enabled: bool,
    pub threshold: f64,
    pub retrieval_backend: String,
    pub eval_backend: String,
    pub llm_backend: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ConfigSnapshot,
    pub cases: Vec<CaseResult>,
    pub aggregate: Aggregate,
}

impl EvalReport {
    /// The report with every latency removed, for comparing runs.
    pub fn without_timings(&self) -> EvalReport {
        let mut r = self.clone();
        for c in &mut r.cases {
            c.latency_ms = None;
        }
        r.aggregate.mean_latency_ms = None;
        r.aggregate.p95_latency_ms = None;
        r
    }
}

fn run_case(engine: &Engine, case: &EvalCase, settings: &EvalSettings, eval_backend: &dyn Embedder) -> CaseResult {
    let mut session = SessionState::new(format!("eval-{}", case.id));
    let opts = AnswerOptions { k: Some(settings.k), rag_enabled: Some(settings.rag_enabled) };
    let start = Instant::now();
    let answered = engine.answer(&case.question, &mut session, &opts);
    let latency = start.elapsed().as_secs_f64() * 1000.0;
    let mut result = CaseResult {
        id: case.id.clone(),
        score: 0.0,
        correct: false,
        latency_ms: (!settings.parallel).then_some(latency),
        route: None,
        expected_route: case.expected_route,
        error: None,
    };
    match answered {
        Ok(resp) => {
            result.route = Some(resp.route.kind);
            match match_score(&resp.answer, &case.ground_truth, eval_backend) {
                Ok(score) => {
                    result.score = score;
                    result.correct = score >= settings.threshold;
                }
                Err(e) => result.error = Some(format!("scoring: {e}")),
            }
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Nearest-rank percentile of a non-empty sample.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn run_eval(
    engine: &Engine,
    cases: &[EvalCase],
    settings: &EvalSettings,
    eval_backend: &dyn Embedder,
) -> Result<EvalReport, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::EmptyFixture);
    }
    if settings.k == 0 {
        return Err(EvalError::InvalidK);
    }
    if !(0.0..=1.0).contains(&settings.threshold) {
        return Err(EvalError::InvalidThreshold(settings.threshold));
    }
    let results: Vec<CaseResult> = if settings.parallel {
        cases.par_iter().map(|c| run_case(engine, c, settings, eval_backend)).collect()
    } else {
        cases.iter().map(|c| run_case(engine, c, settings, eval_backend)).collect()
    };
    let correct_count = results.iter().filter(|r| r.correct).count();
    let mut latencies: Vec<f64> = results.iter().filter_map(|r| r.latency_ms).collect();
    latencies.sort_by(f64::total_cmp);
    let (mean, p95) = if latencies.is_empty() {
        (None, None)
    } else {
        (Some(latencies.iter().sum::<f64>() / latencies.len() as f64), Some(percentile(&latencies, 95.0)))
    };
    Ok(EvalReport {
        config: ConfigSnapshot {
            k: settings.k,
            rag_enabled: settings.rag_enabled,
            threshold: settings.threshold,
            retrieval_backend: engine.embedder().identity().to_string(),
            eval_backend: eval_backend.identity().to_string(),
            llm_backend: engine.llm().name(),
        },
        aggregate: Aggregate {
            case_count: results.len(),
            correct_count,
            matching_pct: 100.0 * correct_count as f64 / results.len() as f64,
            mean_latency_ms: mean,
            p95_latency_ms: p95,
        },
        cases: results,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub matching_pct: f64,
    pub mean_latency_ms: Option<f64>,
}

/// One [`run_eval`] per k, everything else fixed.
pub fn k_sweep(
    engine: &Engine,
    cases: &[EvalCase],
    ks: &[usize],
    settings: &EvalSettings,
    eval_backend: &dyn Embedder,
) -> Result<Vec<SweepRow>, EvalError> {
    if ks.is_empty() {
        return Err(EvalError::EmptySweep);
    }
    if ks.contains(&0) {
        return Err(EvalError::InvalidK);
    }
    ks.iter()
        .map(|&k| {
            let report = run_eval(engine, cases, &EvalSettings { k, ..*settings }, eval_backend)?;
            Ok(SweepRow {
                k,
                matching_pct: report.aggregate.matching_pct,
                mean_latency_ms: report.aggregate.mean_latency_ms,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,matching_pct,mean_latency_ms\n");
    for r in rows {
        let latency = r.mean_latency_ms.map(|l| format!("{l:.3}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.2},{}", r.k, r.matching_pct, latency);
    }
    out
}
