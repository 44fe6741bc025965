//! Reasoning-engine contract: interview question generation and matter
//! analysis. Ships a deterministic scripted stub and an HTTP adapter.

mod http;
mod stub;
mod verify;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consolidation::Authority;
use crate::domain::Jurisdiction;

pub use http::{HttpLlmAdapter, HttpVerifier, LiveAdapterConfig};
pub use stub::{ScriptQuestion, ScriptStep, ScriptedStub, StubScript};
pub use verify::{
    resolve_hint, verify_citations, verify_citations_with, CitationCheck, CitationVerifier,
    UNRESOLVED,
};

pub const MAX_BATCH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("adapter unavailable: {0}")]
    AdapterUnavailable(String),
    #[error("malformed adapter response: {0}")]
    MalformedResponse(String),
    #[error("invalid stub script: {0}")]
    InvalidScript(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
}

/// Everything the adapter may look at for one matter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmContext {
    pub matter_summary: String,
    pub document_texts: Vec<String>,
    /// Answered questions, in ask order.
    pub qa_history: Vec<QaPair>,
    pub jurisdiction: Jurisdiction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBatch {
    #[serde(default)]
    pub questions: Vec<Question>,
    #[serde(default)]
    pub done: bool,
}

impl QuestionBatch {
    pub fn done() -> Self {
        Self {
            questions: Vec::new(),
            done: true,
        }
    }

    /// A finished batch carries no questions; an open one carries 1 to 5.
    pub fn validate(&self) -> Result<(), LlmError> {
        match (self.done, self.questions.len()) {
            (true, 0) => Ok(()),
            (true, _) => Err(LlmError::MalformedResponse(
                "done batch must not carry questions".into(),
            )),
            (false, 1..=MAX_BATCH) => Ok(()),
            (false, n) => Err(LlmError::MalformedResponse(format!(
                "batch must hold 1 to {MAX_BATCH} questions, got {n}"
            ))),
        }
    }
}

/// The adapter's analysis. Every list must be present in the wire form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredAnalysis {
    pub material_facts: Vec<String>,
    pub legal_issues: Vec<String>,
    pub authority_hints: Vec<String>,
    pub recommended_actions: Vec<String>,
}

impl StructuredAnalysis {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.legal_issues.iter().all(|i| i.trim().is_empty()) {
            return Err(LlmError::MalformedResponse("legal_issues is empty".into()));
        }
        Ok(())
    }

    /// Parses and validates an adapter payload.
    pub fn from_json(json: &str) -> Result<Self, LlmError> {
        let a: Self =
            serde_json::from_str(json).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }
}

/// Implementations must be free of side effects visible to the pipeline
/// and safe to call concurrently for different matters.
#[async_trait]
pub trait LlmAdapter: Send + Sync {
    async fn generate_questions(&self, ctx: &LlmContext) -> Result<QuestionBatch, LlmError>;

    async fn analyze_matter(
        &self,
        ctx: &LlmContext,
        authorities: &[Authority],
    ) -> Result<StructuredAnalysis, LlmError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: usize) -> Vec<Question> {
        (0..n)
            .map(|i| Question {
                question_id: format!("q{i}"),
                text: format!("question {i}"),
                rationale: None,
            })
            .collect()
    }

    #[test]
    fn batch_shape() {
        assert!(QuestionBatch::done().validate().is_ok());
        for n in 1..=5 {
            assert!(QuestionBatch { questions: q(n), done: false }.validate().is_ok());
        }
        assert!(QuestionBatch { questions: q(0), done: false }.validate().is_err());
        assert!(QuestionBatch { questions: q(6), done: false }.validate().is_err());
        assert!(QuestionBatch { questions: q(1), done: true }.validate().is_err());
    }

    #[test]
    fn missing_section_is_malformed() {
        let err = StructuredAnalysis::from_json(
            r#"{"material_facts":[],"authority_hints":[],"recommended_actions":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, LlmError::MalformedResponse(_)));
        let err = StructuredAnalysis::from_json(
            r#"{"material_facts":[],"legal_issues":[],"authority_hints":[],"recommended_actions":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, LlmError::MalformedResponse(_)));
    }
}
