use std::io::Read;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LanguageModel, LlmError, LlmKind, PromptBundle};
use crate::ingest::{parse_jsonl, IngestError};

/// One scripted reply: used when `match` occurs in the question
/// (case-insensitive).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub matcher: String,
    pub response: String,
}

pub fn parse_script(reader: impl Read, file: &str) -> Result<Vec<ScriptEntry>, IngestError> {
    Ok(parse_jsonl(reader, file)?.into_iter().map(|(_, e)| e).collect())
}

pub fn parse_script_file(path: &Path) -> Result<Vec<ScriptEntry>, IngestError> {
    let file = path.display().to_string();
    let reader = std::fs::File::open(path).map_err(|source| IngestError::Io { file: file.clone(), source })?;
    parse_script(reader, &file)
}

/// Deterministic stand-in for a chat model.
#[derive(Clone, Debug, Default)]
pub struct ScriptedModel {
    pub script: Vec<ScriptEntry>,
    /// Reply with the prompt context verbatim.
    pub echo: bool,
    /// Sleep this long per prompt character, to simulate generation cost.
    pub delay_per_char: Duration,
    pub fallback: String,
}

impl ScriptedModel {
    pub const DEFAULT_FALLBACK: &'static str = "I do not have an answer for that.";

    pub fn echo() -> Self {
        Self { echo: true, fallback: Self::DEFAULT_FALLBACK.into(), ..Self::default() }
    }

    pub fn scripted(script: Vec<ScriptEntry>) -> Self {
        Self { script, fallback: Self::DEFAULT_FALLBACK.into(), ..Self::default() }
    }

    pub fn with_delay(mut self, per_char: Duration) -> Self {
        self.delay_per_char = per_char;
        self
    }

    fn reply(&self, bundle: &PromptBundle) -> String {
        if self.echo {
            return if bundle.context.is_empty() { bundle.question.clone() } else { bundle.context.clone() };
        }
        let question = bundle.question.to_lowercase();
        self.script
            .iter()
            .find(|e| question.contains(&e.matcher.to_lowercase()))
            .map_or_else(|| self.fallback.clone(), |e| e.response.clone())
    }
}

impl LanguageModel for ScriptedModel {
    fn kind(&self) -> LlmKind {
        LlmKind::ScriptedMock
    }

    fn name(&self) -> String {
        if self.echo {
            "mock (echo)".into()
        } else {
            "mock (scripted)".into()
        }
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        if !self.delay_per_char.is_zero() {
            std::thread::sleep(self.delay_per_char * bundle.size() as u32);
        }
        Ok(self.reply(bundle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Provenance;

    fn bundle(context: &str, question: &str) -> PromptBundle {
        PromptBundle {
            system: "sys".into(),
            context: context.into(),
            question: question.into(),
            history: vec![],
            provenance: Provenance::None,
        }
    }

    #[test]
    fn echo_returns_context() {
        let m = ScriptedModel::echo();
        assert_eq!(m.complete(&bundle("Review A. Review B.", "q")).unwrap(), "Review A. Review B.");
    }

    #[test]
    fn script_matches_case_insensitively_and_is_stable() {
        let script = parse_script(
            "{\"match\":\"pets\",\"response\":\"Dogs are welcome on leash.\"}\n{\"match\":\"\",\"response\":\"catch-all\"}\n"
                .as_bytes(),
            "script",
        )
        .unwrap();
        let m = ScriptedModel::scripted(script);
        let b = bundle("", "Are PETS allowed?");
        assert_eq!(m.complete(&b).unwrap(), "Dogs are welcome on leash.");
        assert_eq!(m.complete(&b).unwrap(), m.complete(&b).unwrap());
        assert_eq!(m.complete(&bundle("", "other")).unwrap(), "catch-all");
        assert_eq!(ScriptedModel::scripted(vec![]).complete(&b).unwrap(), ScriptedModel::DEFAULT_FALLBACK);
    }

    #[test]
    fn script_errors_name_the_line() {
        let err =
            parse_script("{\"match\":\"a\",\"response\":\"b\"}\n{\"match\":1}\n".as_bytes(), "s.jsonl").unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 2, .. }));
    }
}
