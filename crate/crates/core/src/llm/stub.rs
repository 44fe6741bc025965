use std::path::Path;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{LlmAdapter, LlmContext, LlmError, Question, QuestionBatch, StructuredAnalysis};
use crate::consolidation::Authority;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub questions: Vec<ScriptQuestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptQuestion {
    Text(String),
    Full {
        #[serde(default)]
        id: Option<String>,
        text: String,
        #[serde(default)]
        rationale: Option<String>,
    },
}

impl ScriptQuestion {
    fn text(&self) -> &str {
        match self {
            ScriptQuestion::Text(t) => t,
            ScriptQuestion::Full { text, .. } => text,
        }
    }
}

/// Stub script file: interview steps in order plus the analysis to return.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubScript {
    #[serde(default)]
    pub fixture: String,
    pub steps: Vec<ScriptStep>,
    pub analysis: StructuredAnalysis,
}

impl StubScript {
    pub fn from_json(json: &str) -> Result<Self, LlmError> {
        let s: StubScript =
            serde_json::from_str(json).map_err(|e| LlmError::InvalidScript(e.to_string()))?;
        for (i, step) in s.steps.iter().enumerate() {
            if step.questions.is_empty() || step.questions.len() > super::MAX_BATCH {
                return Err(LlmError::InvalidScript(format!(
                    "step {i} must hold 1 to {} questions",
                    super::MAX_BATCH
                )));
            }
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path)
            .map_err(|e| LlmError::InvalidScript(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn question_count(&self) -> usize {
        self.steps.iter().map(|s| s.questions.len()).sum()
    }
}

/// Replays a script. The reply depends only on the script and the number
/// of answered questions: with `h` answers, the stub returns the rest of
/// the step holding the `h`-th scripted question, and `done` once the
/// script is exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedStub {
    script: StubScript,
}

impl ScriptedStub {
    pub fn new(script: StubScript) -> Self {
        Self { script }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        StubScript::load(path).map(Self::new)
    }

    pub fn script(&self) -> &StubScript {
        &self.script
    }

    pub fn batch_for(&self, answered: usize) -> QuestionBatch {
        let mut skipped = 0;
        for (step_idx, step) in self.script.steps.iter().enumerate() {
            let len = step.questions.len();
            if answered < skipped + len {
                let offset = answered - skipped;
                let questions = step.questions[offset..]
                    .iter()
                    .enumerate()
                    .map(|(i, q)| {
                        let default_id = format!("s{}q{}", step_idx + 1, offset + i + 1);
                        match q {
                            ScriptQuestion::Text(t) => Question {
                                question_id: default_id,
                                text: t.clone(),
                                rationale: None,
                            },
                            ScriptQuestion::Full { id, text, rationale } => Question {
                                question_id: id.clone().unwrap_or(default_id),
                                text: text.clone(),
                                rationale: rationale.clone(),
                            },
                        }
                    })
                    .collect();
                return QuestionBatch {
                    questions,
                    done: false,
                };
            }
            skipped += len;
        }
        QuestionBatch::done()
    }

    /// Every scripted question text in script order.
    pub fn scripted_questions(&self) -> Vec<&str> {
        self.script
            .steps
            .iter()
            .flat_map(|s| s.questions.iter().map(ScriptQuestion::text))
            .collect()
    }
}

#[async_trait]
impl LlmAdapter for ScriptedStub {
    async fn generate_questions(&self, ctx: &LlmContext) -> Result<QuestionBatch, LlmError> {
        Ok(self.batch_for(ctx.qa_history.len()))
    }

    async fn analyze_matter(
        &self,
        _ctx: &LlmContext,
        _authorities: &[Authority],
    ) -> Result<StructuredAnalysis, LlmError> {
        self.script.analysis.validate()?;
        Ok(self.script.analysis.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCRIPT: &str = r#"{
        "fixture": "t",
        "steps": [
            {"questions": ["When did the lease begin?", {"id": "rent", "text": "What is the rent?"}]},
            {"questions": ["Was notice given?"]}
        ],
        "analysis": {"material_facts": ["f"], "legal_issues": ["i"], "authority_hints": [], "recommended_actions": []}
    }"#;

    #[test]
    fn replay_by_history_length() {
        let stub = ScriptedStub::new(StubScript::from_json(SCRIPT).unwrap());
        let b0 = stub.batch_for(0);
        assert_eq!(b0.questions.len(), 2);
        assert_eq!(b0.questions[0].text, "When did the lease begin?");
        assert_eq!(b0.questions[1].question_id, "rent");
        let b1 = stub.batch_for(1);
        assert_eq!(b1.questions.len(), 1);
        assert_eq!(b1.questions[0].text, "What is the rent?");
        assert_eq!(stub.batch_for(2).questions[0].text, "Was notice given?");
        for h in 3..10 {
            assert!(stub.batch_for(h).done);
        }
    }

    #[test]
    fn empty_steps_rejected() {
        let bad = SCRIPT.replace(r#"{"questions": ["Was notice given?"]}"#, r#"{"questions": []}"#);
        assert!(matches!(StubScript::from_json(&bad), Err(LlmError::InvalidScript(_))));
    }

    #[test]
    fn missing_file_is_a_script_error() {
        assert!(matches!(
            StubScript::load("/nonexistent/stub.json"),
            Err(LlmError::InvalidScript(_))
        ));
    }
}
