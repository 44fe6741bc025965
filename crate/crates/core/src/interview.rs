//! The interview loop: adapter-generated questions, recorded answers,
//! repeat suppression and termination.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflict::name_similarity;
use crate::domain::{Matter, SessionStatus};
use crate::llm::{LlmAdapter, LlmContext, LlmError, QaPair, Question};
use crate::text::normalize_text;

pub const DEFAULT_MAX_ROUNDS: u32 = 12;
/// Questions at or above this similarity to an earlier one are repeats.
pub const REPEAT_THRESHOLD: f64 = 0.9;

/// Question text as compared for repeats. Hyphens and slashes separate
/// words, so "month-to-month" and "month to month" agree.
pub fn normalize_question(text: &str) -> String {
    normalize_text(&text.replace(['-', '/', '\u{2013}'], " "))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterviewError {
    #[error("interview cannot start from status {0}")]
    WrongStatus(SessionStatus),
    #[error("question {0} is still awaiting an answer")]
    PendingQuestion(String),
    #[error("no pending question with id {0}")]
    NoSuchPending(String),
    #[error(transparent)]
    Adapter(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Active,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionReason {
    RoundCap,
    AdapterDone,
    /// Two consecutive batches held nothing but repeats.
    RepeatsOnly,
    ClientFinished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaEntry {
    pub question_id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewState {
    pub matter_id: String,
    pub qa_history: Vec<QaEntry>,
    /// Normalized text of every question asked, in ask order.
    pub asked_normalized: Vec<String>,
    pub round: u32,
    pub max_rounds: u32,
    pub phase: Phase,
    pub completion: Option<CompletionReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NextQuestion {
    Question(Question),
    Done { reason: CompletionReason },
}

pub fn start_interview(matter: &Matter, max_rounds: u32) -> Result<InterviewState, InterviewError> {
    if matter.status != SessionStatus::DocumentsCollected {
        return Err(InterviewError::WrongStatus(matter.status));
    }
    Ok(InterviewState::new(&matter.matter_id, max_rounds))
}

impl InterviewState {
    pub fn new(matter_id: &str, max_rounds: u32) -> Self {
        Self {
            matter_id: matter_id.to_string(),
            qa_history: Vec::new(),
            asked_normalized: Vec::new(),
            round: 0,
            max_rounds,
            phase: if max_rounds == 0 { Phase::Complete } else { Phase::Active },
            completion: (max_rounds == 0).then_some(CompletionReason::RoundCap),
        }
    }

    pub fn pending(&self) -> Option<&QaEntry> {
        self.qa_history.last().filter(|e| e.answer.is_none())
    }

    pub fn is_complete(&self) -> bool {
        self.phase == Phase::Complete
    }

    /// Answered pairs in ask order, as the adapter sees them.
    pub fn answered(&self) -> Vec<QaPair> {
        self.qa_history
            .iter()
            .filter_map(|e| {
                e.answer.as_ref().map(|a| QaPair {
                    question: e.question.clone(),
                    answer: a.clone(),
                })
            })
            .collect()
    }

    fn complete(&mut self, reason: CompletionReason) -> NextQuestion {
        if self.phase == Phase::Active {
            self.phase = Phase::Complete;
            self.completion = Some(reason);
        }
        NextQuestion::Done {
            reason: self.completion.unwrap_or(reason),
        }
    }

    fn is_repeat(&self, normalized: &str) -> bool {
        normalized.is_empty()
            || self
                .asked_normalized
                .iter()
                .any(|seen| name_similarity(seen, normalized) >= REPEAT_THRESHOLD)
    }

    fn first_fresh(&self, questions: Vec<Question>) -> Option<(Question, String)> {
        questions.into_iter().find_map(|q| {
            let n = normalize_question(&q.text);
            (!self.is_repeat(&n)).then_some((q, n))
        })
    }

    /// Client-initiated end. A cap or adapter completion already recorded
    /// takes precedence.
    pub fn finish(&self) -> (InterviewState, CompletionReason) {
        let mut next = self.clone();
        if let Some(p) = next.qa_history.last() {
            if p.answer.is_none() {
                next.qa_history.pop();
            }
        }
        let NextQuestion::Done { reason } = next.complete(CompletionReason::ClientFinished) else {
            unreachable!()
        };
        (next, reason)
    }
}

/// Asks the adapter for the next question. On adapter failure the state is
/// left as it was. Once complete, keeps answering `Done`.
pub async fn next_question(
    state: &InterviewState,
    adapter: &dyn LlmAdapter,
    base: &LlmContext,
) -> Result<(InterviewState, NextQuestion), InterviewError> {
    let mut next = state.clone();
    if next.phase == Phase::Complete {
        let done = next.complete(CompletionReason::AdapterDone);
        return Ok((next, done));
    }
    if let Some(p) = next.pending() {
        return Err(InterviewError::PendingQuestion(p.question_id.clone()));
    }
    if next.round >= next.max_rounds {
        let done = next.complete(CompletionReason::RoundCap);
        return Ok((next, done));
    }

    let ctx = LlmContext {
        qa_history: next.answered(),
        ..base.clone()
    };
    let mut picked = None;
    for _attempt in 0..2 {
        let batch = adapter.generate_questions(&ctx).await?;
        batch.validate()?;
        if batch.done {
            let done = next.complete(CompletionReason::AdapterDone);
            return Ok((next, done));
        }
        picked = next.first_fresh(batch.questions);
        if picked.is_some() {
            break;
        }
    }
    let Some((q, normalized)) = picked else {
        let done = next.complete(CompletionReason::RepeatsOnly);
        return Ok((next, done));
    };

    next.round += 1;
    let question = Question {
        question_id: format!("q{}", next.round),
        text: q.text,
        rationale: q.rationale,
    };
    next.qa_history.push(QaEntry {
        question_id: question.question_id.clone(),
        question: question.text.clone(),
        rationale: question.rationale.clone(),
        answer: None,
    });
    next.asked_normalized.push(normalized);
    Ok((next, NextQuestion::Question(question)))
}

/// Stores the answer to the pending question. Answering the question that
/// reaches the round cap completes the interview.
pub fn record_answer(
    state: &InterviewState,
    question_id: &str,
    answer: &str,
) -> Result<InterviewState, InterviewError> {
    let mut next = state.clone();
    match next.qa_history.last_mut() {
        Some(e) if e.answer.is_none() && e.question_id == question_id => {
            e.answer = Some(answer.to_string());
        }
        _ => return Err(InterviewError::NoSuchPending(question_id.to_string())),
    }
    if next.round >= next.max_rounds {
        next.complete(CompletionReason::RoundCap);
    }
    Ok(next)
}

fn escape_line(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n")
}

/// `Q: ...\nA: ...\n` per answered question, in ask order. Backslashes and
/// newlines inside texts are escaped so each entry stays on one line.
pub fn transcript(state: &InterviewState) -> String {
    let mut out = String::new();
    for e in &state.qa_history {
        if let Some(a) = &e.answer {
            out.push_str("Q: ");
            out.push_str(&escape_line(&e.question));
            out.push_str("\nA: ");
            out.push_str(&escape_line(a));
            out.push('\n');
        }
    }
    out
}
