//! The consultation pipeline as a service: sessions, the status machine,
//! both conflict gates, and a write-ahead audit trail.

pub mod audit;
pub mod http;
mod runtime;
pub mod session;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::conflict::{normalize_party_name, CheckStage, ConflictChecker, ConflictOutcome, ConflictStore};
use crate::consolidation::{consolidate, Authority, Consolidated, RankingConfig};
use crate::domain::{
    validate_client_profile, ClientProfile, IssueCategory, Jurisdiction, Matter, Party,
    SessionStatus,
};
use crate::ingest::{extract_parties_from_text, key_terms, Document, Ingestor};
use crate::interview::{
    next_question, record_answer, InterviewError, InterviewState, NextQuestion, QaEntry,
};
use crate::llm::{
    verify_citations, verify_citations_with, CitationCheck, CitationVerifier, LlmAdapter,
    LlmContext, LlmError, Question, StructuredAnalysis,
};
use crate::report::{assemble_with_checks, render_report, AnalysisReport, ReportFormat};
use crate::research::{
    build_query_plan, execute_plan, ConnectorRegistry, FanoutOutcome, GenericQuery, QueryPlan,
    ResearchError, RoutingTable, DEFAULT_MAX_RESULTS,
};

use audit::{AuditEventKind, AuditLog, AuditSink, MemorySink, Transition};
use session::{SessionCheck, SessionManager};

pub use runtime::{Runtime, RuntimeError, RuntimeOverrides};

/// Key terms drawn from the matter when no research terms were given.
const DERIVED_TERMS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrchestratorError {
    #[error("{0}")]
    Validation(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("missing or unknown session token")]
    Unauthorized,
    #[error("session expired")]
    SessionExpired,
    #[error("session terminated ({0})")]
    SessionTerminated(SessionStatus),
    #[error("cannot {action} while {from}")]
    IllegalTransition { from: SessionStatus, action: String },
    #[error("language model unavailable: {0}")]
    AdapterUnavailable(String),
    #[error(transparent)]
    AuditUnavailable(#[from] audit::AuditUnavailable),
    #[error("{0}")]
    Internal(String),
}

impl OrchestratorError {
    pub fn code(&self) -> &'static str {
        match self {
            OrchestratorError::Validation(_) => "Validation",
            OrchestratorError::NotFound(_) => "NotFound",
            OrchestratorError::Unauthorized => "Unauthorized",
            OrchestratorError::SessionExpired => "SessionExpired",
            OrchestratorError::SessionTerminated(_) => "SessionTerminated",
            OrchestratorError::IllegalTransition { .. } => "IllegalTransition",
            OrchestratorError::AdapterUnavailable(_) => "AdapterUnavailable",
            OrchestratorError::AuditUnavailable(_) => "AuditUnavailable",
            OrchestratorError::Internal(_) => "Internal",
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            OrchestratorError::Validation(_) => 400,
            OrchestratorError::NotFound(_) => 404,
            OrchestratorError::Unauthorized | OrchestratorError::SessionExpired => 401,
            OrchestratorError::SessionTerminated(_) | OrchestratorError::IllegalTransition { .. } => 409,
            OrchestratorError::AdapterUnavailable(_) => 503,
            OrchestratorError::AuditUnavailable(_) | OrchestratorError::Internal(_) => 500,
        }
    }
}

type Result<T> = std::result::Result<T, OrchestratorError>;

fn illegal(from: SessionStatus, action: &str) -> OrchestratorError {
    OrchestratorError::IllegalTransition {
        from,
        action: action.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewClient {
    pub parties: Vec<Party>,
    pub jurisdiction: Jurisdiction,
    #[serde(default)]
    pub contact: String,
}

/// A matter references a registered client or carries one inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewMatter {
    #[serde(default)]
    pub client_id: Option<String>,
    #[serde(default)]
    pub client: Option<NewClient>,
    pub summary: String,
    #[serde(default)]
    pub issue_categories: Vec<IssueCategory>,
    #[serde(default)]
    pub research_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatterCreated {
    pub matter_id: String,
    pub client_id: String,
    pub session_token: String,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictCheckResponse {
    pub stage: CheckStage,
    pub verdict: crate::conflict::Verdict,
    pub hit_count: usize,
    pub status: SessionStatus,
}

#[derive(Debug, Clone)]
pub struct Upload {
    pub filename: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentsResponse {
    pub doc_ids: Vec<String>,
    /// Binary uploads whose text could not be extracted.
    pub unextracted: Vec<String>,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewStep {
    pub next: NextQuestion,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub status: SessionStatus,
    pub interview_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchSummary {
    pub status: SessionStatus,
    pub providers: Vec<crate::research::ProviderId>,
    pub raw_count: usize,
    pub unique_count: usize,
    pub failures: Vec<crate::research::ProviderFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub status: SessionStatus,
    pub legal_issues: usize,
    pub authority_hints: usize,
    pub resolved_hints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatterView {
    pub matter_id: String,
    pub status: SessionStatus,
    pub documents: Vec<String>,
    pub pending_question: Option<Question>,
    pub transcript: Vec<QaEntry>,
}

/// Everything the pipeline knows about one matter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatterRecord {
    pub matter: Matter,
    pub documents: Vec<Document>,
    pub interview: Option<InterviewState>,
    pub preliminary: Option<ConflictOutcome>,
    pub comprehensive: Option<ConflictOutcome>,
    pub query: Option<GenericQuery>,
    pub fanout: Option<FanoutOutcome>,
    pub consolidated: Option<Consolidated>,
    pub analysis: Option<StructuredAnalysis>,
    pub citation_checks: Vec<CitationCheck>,
    pub report: Option<AnalysisReport>,
}

impl MatterRecord {
    fn status(&self) -> SessionStatus {
        self.matter.status
    }

    fn adapter_context(&self) -> LlmContext {
        LlmContext {
            matter_summary: self.matter.summary.clone(),
            document_texts: self.documents.iter().map(|d| d.text.clone()).collect(),
            qa_history: self.interview.as_ref().map(|i| i.answered()).unwrap_or_default(),
            jurisdiction: self.matter.client.jurisdiction.clone(),
        }
    }

    /// Profile parties plus names found in documents and answers, one per
    /// normalized name.
    pub fn expanded_parties(&self) -> Vec<Party> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |p: Party| {
            if let Ok(n) = normalize_party_name(&p.raw_name) {
                if seen.insert(n) {
                    out.push(p);
                }
            }
        };
        self.matter.client.parties.iter().cloned().for_each(&mut push);
        for d in &self.documents {
            extract_parties_from_text(&d.text).into_iter().for_each(&mut push);
        }
        if let Some(i) = &self.interview {
            for qa in i.answered() {
                extract_parties_from_text(&qa.answer).into_iter().for_each(&mut push);
            }
        }
        out
    }

    fn research_query(&self, max_results: usize) -> Result<GenericQuery> {
        let mut terms = self.matter.research_terms.clone();
        if terms.iter().all(|t| t.trim().is_empty()) {
            let mut text = self.matter.summary.clone();
            for d in &self.documents {
                text.push('\n');
                text.push_str(&d.text);
            }
            terms = key_terms(&text, DERIVED_TERMS);
        }
        let mut q = GenericQuery::new(
            terms,
            self.matter.client.jurisdiction.clone(),
            IssueCategory::for_research(&self.matter.issue_categories),
        );
        q.max_results_per_provider = max_results;
        q.validate()
            .map_err(|e| OrchestratorError::Validation(e.to_string()))?;
        Ok(q)
    }
}

pub struct OrchestratorBuilder {
    adapter: Arc<dyn LlmAdapter>,
    registry: ConnectorRegistry,
    clock: Arc<dyn Clock>,
    sink: Arc<dyn AuditSink>,
    salt: Option<String>,
    conflicts: Arc<ConflictStore>,
    checker: ConflictChecker,
    routing: RoutingTable,
    ranking: RankingConfig,
    disclaimer: Option<String>,
    max_rounds: u32,
    max_results: usize,
    idle: chrono::Duration,
    verifier: Option<Arc<dyn CitationVerifier>>,
    ingestor: Ingestor,
    data_dir: Option<PathBuf>,
}

impl OrchestratorBuilder {
    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn audit_sink(mut self, sink: Arc<dyn AuditSink>) -> Self {
        self.sink = sink;
        self
    }

    pub fn salt(mut self, salt: impl Into<String>) -> Self {
        self.salt = Some(salt.into());
        self
    }

    pub fn conflicts(mut self, store: Arc<ConflictStore>) -> Self {
        self.conflicts = store;
        self
    }

    pub fn checker(mut self, checker: ConflictChecker) -> Self {
        self.checker = checker;
        self
    }

    pub fn routing(mut self, table: RoutingTable) -> Self {
        self.routing = table;
        self
    }

    pub fn ranking(mut self, cfg: RankingConfig) -> Self {
        self.ranking = cfg;
        self
    }

    /// `None` or blank makes report generation fail.
    pub fn disclaimer(mut self, text: Option<String>) -> Self {
        self.disclaimer = text;
        self
    }

    pub fn max_rounds(mut self, n: u32) -> Self {
        self.max_rounds = n;
        self
    }

    pub fn max_results_per_provider(mut self, n: usize) -> Self {
        self.max_results = n;
        self
    }

    pub fn idle_timeout(mut self, idle: chrono::Duration) -> Self {
        self.idle = idle;
        self
    }

    pub fn verifier(mut self, verifier: Arc<dyn CitationVerifier>) -> Self {
        self.verifier = Some(verifier);
        self
    }

    pub fn ingestor(mut self, ingestor: Ingestor) -> Self {
        self.ingestor = ingestor;
        self
    }

    /// Directory for per-matter state snapshots.
    pub fn data_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.data_dir = Some(dir.into());
        self
    }

    pub fn build(self) -> Orchestrator {
        let salt = self.salt.unwrap_or_else(|| {
            let mut b = [0u8; 16];
            rand::RngCore::fill_bytes(&mut rand::rngs::OsRng, &mut b);
            hex::encode(b)
        });
        Orchestrator {
            adapter: self.adapter,
            registry: self.registry,
            clock: self.clock,
            audit: AuditLog::new(self.sink, salt),
            sessions: SessionManager::new(self.idle),
            conflicts: self.conflicts,
            checker: self.checker,
            routing: self.routing,
            ranking: self.ranking,
            disclaimer: self.disclaimer,
            max_rounds: self.max_rounds,
            max_results: self.max_results,
            verifier: self.verifier,
            ingestor: self.ingestor,
            data_dir: self.data_dir,
            clients: Mutex::new(HashMap::new()),
            matters: Mutex::new(HashMap::new()),
            next_client: AtomicU64::new(1),
            next_matter: AtomicU64::new(1),
            next_doc: AtomicU64::new(1),
        }
    }
}

pub struct Orchestrator {
    adapter: Arc<dyn LlmAdapter>,
    registry: ConnectorRegistry,
    clock: Arc<dyn Clock>,
    audit: AuditLog,
    sessions: SessionManager,
    conflicts: Arc<ConflictStore>,
    checker: ConflictChecker,
    routing: RoutingTable,
    ranking: RankingConfig,
    disclaimer: Option<String>,
    max_rounds: u32,
    max_results: usize,
    verifier: Option<Arc<dyn CitationVerifier>>,
    ingestor: Ingestor,
    data_dir: Option<PathBuf>,
    clients: Mutex<HashMap<String, ClientProfile>>,
    matters: Mutex<HashMap<String, Arc<tokio::sync::Mutex<MatterRecord>>>>,
    next_client: AtomicU64,
    next_matter: AtomicU64,
    next_doc: AtomicU64,
}

/// Holds a matter's lock for the duration of one request.
struct Step<'a> {
    orch: &'a Orchestrator,
    guard: tokio::sync::OwnedMutexGuard<MatterRecord>,
}

impl Step<'_> {
    /// Writes the event ahead of any state change. `to` is recorded as a
    /// transition from the current status.
    fn log(
        &self,
        event: AuditEventKind,
        to: Option<SessionStatus>,
        detail: serde_json::Value,
    ) -> Result<u64> {
        let transition = to.map(|to| Transition {
            from: Some(self.guard.status()),
            to,
        });
        Ok(self.orch.audit.append(
            &self.guard.matter.matter_id,
            event,
            transition,
            detail,
            self.orch.clock.now(),
        )?)
    }

    fn commit(&mut self, next: SessionStatus) {
        let from = self.guard.status();
        debug_assert!(
            from == next || from.can_transition_to(next),
            "illegal transition {from} -> {next}"
        );
        self.guard.matter.status = next;
        self.orch.persist(&self.guard);
    }
}

impl Orchestrator {
    pub fn builder(adapter: Arc<dyn LlmAdapter>, registry: ConnectorRegistry) -> OrchestratorBuilder {
        OrchestratorBuilder {
            adapter,
            registry,
            clock: Arc::new(SystemClock),
            sink: Arc::new(MemorySink::default()),
            salt: None,
            conflicts: Arc::new(ConflictStore::in_memory(Vec::new()).expect("empty store")),
            checker: ConflictChecker::default(),
            routing: RoutingTable::default(),
            ranking: RankingConfig::default(),
            disclaimer: Some(crate::report::DEFAULT_DISCLAIMER.to_string()),
            max_rounds: crate::interview::DEFAULT_MAX_ROUNDS,
            max_results: DEFAULT_MAX_RESULTS,
            idle: chrono::Duration::minutes(60),
            verifier: None,
            ingestor: Ingestor::default(),
            data_dir: None,
        }
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn conflicts(&self) -> &ConflictStore {
        &self.conflicts
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    pub fn register_client(&self, req: NewClient) -> Result<ClientProfile> {
        let client_id = format!("c-{:06}", self.next_client.fetch_add(1, Ordering::SeqCst));
        let profile = ClientProfile {
            client_id: client_id.clone(),
            parties: req.parties,
            jurisdiction: req.jurisdiction,
            contact: req.contact,
        };
        let v = validate_client_profile(&profile);
        if !v.is_ok() {
            let codes: Vec<_> = v.violations.iter().map(|v| v.code()).collect();
            return Err(OrchestratorError::Validation(codes.join(", ")));
        }
        self.clients
            .lock()
            .unwrap()
            .insert(client_id, profile.clone());
        Ok(profile)
    }

    pub fn create_matter(&self, req: NewMatter) -> Result<MatterCreated> {
        let client = match (req.client_id, req.client) {
            (Some(id), None) => self
                .clients
                .lock()
                .unwrap()
                .get(&id)
                .cloned()
                .ok_or_else(|| OrchestratorError::NotFound(format!("client {id}")))?,
            (None, Some(c)) => self.register_client(c)?,
            _ => {
                return Err(OrchestratorError::Validation(
                    "give exactly one of client_id or client".into(),
                ))
            }
        };
        if req.summary.trim().is_empty() {
            return Err(OrchestratorError::Validation("summary is empty".into()));
        }
        let matter_id = format!("m-{:06}", self.next_matter.fetch_add(1, Ordering::SeqCst));
        let record = MatterRecord {
            matter: Matter {
                matter_id: matter_id.clone(),
                client,
                summary: req.summary,
                issue_categories: req.issue_categories,
                research_terms: req.research_terms,
                documents: Vec::new(),
                status: SessionStatus::Registered,
            },
            documents: Vec::new(),
            interview: None,
            preliminary: None,
            comprehensive: None,
            query: None,
            fanout: None,
            consolidated: None,
            analysis: None,
            citation_checks: Vec::new(),
            report: None,
        };
        let parties = self.hashed_parties(&record.matter.client.parties);
        self.audit.append(
            &matter_id,
            AuditEventKind::Registered,
            Some(Transition {
                from: None,
                to: SessionStatus::Registered,
            }),
            json!({
                "client_id": record.matter.client.client_id,
                "jurisdiction": record.matter.client.jurisdiction,
                "issue_categories": record.matter.issue_categories,
                "parties": parties,
            }),
            self.clock.now(),
        )?;
        self.persist(&record);
        let now = self.clock.now();
        let token = self.sessions.issue(&matter_id, now);
        let client_id = record.matter.client.client_id.clone();
        self.matters
            .lock()
            .unwrap()
            .insert(matter_id.clone(), Arc::new(tokio::sync::Mutex::new(record)));
        Ok(MatterCreated {
            matter_id,
            client_id,
            session_token: token,
            status: SessionStatus::Registered,
        })
    }

    fn hashed_parties(&self, parties: &[Party]) -> Vec<serde_json::Value> {
        parties
            .iter()
            .map(|p| json!({ "party_hash": self.audit.party_hash(&p.raw_name), "role": p.role }))
            .collect()
    }

    fn outcome_detail(&self, o: &ConflictOutcome, party_count: usize) -> serde_json::Value {
        let hits: Vec<_> = o
            .hits
            .iter()
            .map(|h| {
                json!({
                    "party_hash": self.audit.party_hash(&h.query_party),
                    "record_id": h.record.record_id,
                    "side": h.record.side,
                    "similarity": h.similarity,
                })
            })
            .collect();
        json!({
            "stage": o.stage,
            "verdict": o.verdict,
            "party_count": party_count,
            "hit_count": o.hits.len(),
            "hits": hits,
        })
    }

    fn persist(&self, record: &MatterRecord) {
        let Some(dir) = &self.data_dir else { return };
        let dir = dir.join("matters");
        let result = std::fs::create_dir_all(&dir).and_then(|_| {
            use std::io::Write;
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join(format!("{}.jsonl", record.matter.matter_id)))?;
            let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
            writeln!(f, "{line}")
        });
        if let Err(e) = result {
            log::error!("state snapshot for {} not written: {e}", record.matter.matter_id);
        }
    }

    /// Locks the matter after checking the token. Terminated matters reject
    /// everything but status views.
    async fn open(&self, token: &str, matter_id: &str, allow_terminated: bool) -> Result<Step<'_>> {
        let cell = self
            .matters
            .lock()
            .unwrap()
            .get(matter_id)
            .cloned()
            .ok_or_else(|| OrchestratorError::NotFound(format!("matter {matter_id}")))?;
        match self.sessions.touch(token, matter_id, self.clock.now()) {
            SessionCheck::Valid => {}
            SessionCheck::Expired => return Err(OrchestratorError::SessionExpired),
            SessionCheck::Unknown | SessionCheck::WrongMatter => {
                return Err(OrchestratorError::Unauthorized)
            }
        }
        let guard = cell.lock_owned().await;
        let status = guard.status();
        if !allow_terminated
            && matches!(status, SessionStatus::TerminatedConflict | SessionStatus::TerminatedError)
        {
            return Err(OrchestratorError::SessionTerminated(status));
        }
        Ok(Step { orch: self, guard })
    }

    pub async fn view(&self, token: &str, matter_id: &str) -> Result<MatterView> {
        let step = self.open(token, matter_id, true).await?;
        let r = &*step.guard;
        let interview = r.interview.as_ref();
        Ok(MatterView {
            matter_id: r.matter.matter_id.clone(),
            status: r.status(),
            documents: r.matter.documents.clone(),
            pending_question: interview.and_then(|i| i.pending()).map(|p| Question {
                question_id: p.question_id.clone(),
                text: p.question.clone(),
                rationale: p.rationale.clone(),
            }),
            transcript: interview.map(|i| i.qa_history.clone()).unwrap_or_default(),
        })
    }

    pub async fn conflict_check(
        &self,
        token: &str,
        matter_id: &str,
        stage: CheckStage,
    ) -> Result<ConflictCheckResponse> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        let (parties, checked, cleared) = match (stage, from) {
            (CheckStage::Preliminary, SessionStatus::Registered) => (
                step.guard.matter.client.parties.clone(),
                AuditEventKind::PrelimConflictChecked,
                SessionStatus::PrelimCleared,
            ),
            (CheckStage::Comprehensive, SessionStatus::InterviewComplete) => (
                step.guard.expanded_parties(),
                AuditEventKind::ComprehensiveConflictChecked,
                SessionStatus::ComprehensiveCleared,
            ),
            _ => return Err(illegal(from, &format!("run the {} conflict check", stage.as_str()))),
        };
        let outcome = match stage {
            CheckStage::Preliminary => self
                .checker
                .preliminary_check(&step.guard.matter.client, &self.conflicts),
            CheckStage::Comprehensive => self.checker.comprehensive_check(&parties, &self.conflicts),
        }
        .map_err(|e| OrchestratorError::Internal(e.to_string()))?;

        let blocked = outcome.verdict.blocks();
        let detail = self.outcome_detail(&outcome, parties.len());
        let next = if blocked { SessionStatus::TerminatedConflict } else { cleared };
        step.log(checked, (!blocked).then_some(next), detail)?;
        if blocked {
            step.log(
                AuditEventKind::ConflictTerminated,
                Some(next),
                json!({ "stage": outcome.stage, "verdict": outcome.verdict }),
            )?;
        }
        let response = ConflictCheckResponse {
            stage,
            verdict: outcome.verdict,
            hit_count: outcome.hits.len(),
            status: next,
        };
        match stage {
            CheckStage::Preliminary => step.guard.preliminary = Some(outcome),
            CheckStage::Comprehensive => step.guard.comprehensive = Some(outcome),
        }
        step.commit(next);
        Ok(response)
    }

    /// Ingests a batch of uploads. The first batch moves the matter to
    /// `DocumentsCollected`; later batches are accepted until the interview
    /// starts. An empty batch is allowed.
    pub async fn upload_documents(
        &self,
        token: &str,
        matter_id: &str,
        uploads: Vec<Upload>,
    ) -> Result<DocumentsResponse> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        if !matches!(from, SessionStatus::PrelimCleared | SessionStatus::DocumentsCollected) {
            return Err(illegal(from, "upload documents"));
        }
        let now = self.clock.now();
        let mut docs = Vec::with_capacity(uploads.len());
        for u in &uploads {
            let doc_id = format!("d-{:06}", self.next_doc.fetch_add(1, Ordering::SeqCst));
            let doc = self
                .ingestor
                .ingest(&u.bytes, &u.filename, matter_id, doc_id, now)
                .map_err(|e| OrchestratorError::Validation(format!("{}: {e}", u.filename)))?;
            docs.push(doc);
        }
        let doc_ids: Vec<String> = docs.iter().map(|d| d.doc_id.clone()).collect();
        let unextracted: Vec<String> = docs
            .iter()
            .filter(|d| d.unextracted)
            .map(|d| d.doc_id.clone())
            .collect();
        let detail = json!({
            "doc_ids": doc_ids,
            "formats": docs.iter().map(|d| d.declared_format).collect::<Vec<_>>(),
            "bytes": uploads.iter().map(|u| u.bytes.len()).collect::<Vec<_>>(),
            "unextracted": unextracted,
        });
        let next = SessionStatus::DocumentsCollected;
        step.log(
            AuditEventKind::DocumentIngested,
            (from != next).then_some(next),
            detail,
        )?;
        step.guard.matter.documents.extend(doc_ids.iter().cloned());
        step.guard.documents.extend(docs);
        step.commit(next);
        Ok(DocumentsResponse {
            doc_ids,
            unextracted,
            status: next,
        })
    }

    /// Returns the pending question, asks a new one, or reports completion.
    pub async fn next_question(&self, token: &str, matter_id: &str) -> Result<InterviewStep> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        let state = match from {
            SessionStatus::DocumentsCollected => InterviewState::new(matter_id, self.max_rounds),
            SessionStatus::InterviewInProgress => step.guard.interview.clone().expect("interview state"),
            SessionStatus::InterviewComplete => {
                let reason = step
                    .guard
                    .interview
                    .as_ref()
                    .and_then(|i| i.completion)
                    .expect("completed interview");
                return Ok(InterviewStep {
                    next: NextQuestion::Done { reason },
                    status: from,
                });
            }
            _ => return Err(illegal(from, "continue the interview")),
        };
        if let Some(p) = state.pending() {
            return Ok(InterviewStep {
                next: NextQuestion::Question(Question {
                    question_id: p.question_id.clone(),
                    text: p.question.clone(),
                    rationale: p.rationale.clone(),
                }),
                status: from,
            });
        }
        let ctx = step.guard.adapter_context();
        let (state, next) = match next_question(&state, self.adapter.as_ref(), &ctx).await {
            Ok(v) => v,
            Err(InterviewError::Adapter(LlmError::AdapterUnavailable(m))) => {
                return Err(OrchestratorError::AdapterUnavailable(m))
            }
            Err(InterviewError::Adapter(e)) => {
                step.log(
                    AuditEventKind::QuestionAsked,
                    Some(SessionStatus::TerminatedError),
                    json!({ "error": e.to_string() }),
                )?;
                step.commit(SessionStatus::TerminatedError);
                return Err(OrchestratorError::Internal(e.to_string()));
            }
            Err(e) => return Err(OrchestratorError::Internal(e.to_string())),
        };
        let to = match &next {
            NextQuestion::Question(_) => SessionStatus::InterviewInProgress,
            NextQuestion::Done { .. } => SessionStatus::InterviewComplete,
        };
        let detail = match &next {
            NextQuestion::Question(q) => json!({ "question_id": q.question_id, "round": state.round }),
            NextQuestion::Done { reason } => json!({ "outcome": "done", "reason": reason }),
        };
        step.log(AuditEventKind::QuestionAsked, (from != to).then_some(to), detail)?;
        step.guard.interview = Some(state);
        step.commit(to);
        Ok(InterviewStep { next, status: to })
    }

    pub async fn answer(
        &self,
        token: &str,
        matter_id: &str,
        question_id: &str,
        answer: &str,
    ) -> Result<AnswerResponse> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        if from != SessionStatus::InterviewInProgress {
            return Err(illegal(from, "record an answer"));
        }
        let state = step.guard.interview.as_ref().expect("interview state");
        let next = record_answer(state, question_id, answer)
            .map_err(|e| OrchestratorError::Validation(e.to_string()))?;
        let to = if next.is_complete() {
            SessionStatus::InterviewComplete
        } else {
            SessionStatus::InterviewInProgress
        };
        step.log(
            AuditEventKind::AnswerRecorded,
            (from != to).then_some(to),
            json!({
                "question_id": question_id,
                "answer_chars": answer.chars().count(),
                "completion": next.completion,
            }),
        )?;
        step.guard.interview = Some(next);
        step.commit(to);
        Ok(AnswerResponse {
            status: to,
            interview_complete: to == SessionStatus::InterviewComplete,
        })
    }

    /// Ends the interview at the client's request.
    pub async fn finish_interview(&self, token: &str, matter_id: &str) -> Result<InterviewStep> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        let state = match from {
            SessionStatus::DocumentsCollected => InterviewState::new(matter_id, self.max_rounds),
            SessionStatus::InterviewInProgress => step.guard.interview.clone().expect("interview state"),
            _ => return Err(illegal(from, "finish the interview")),
        };
        let (state, reason) = state.finish();
        let to = SessionStatus::InterviewComplete;
        step.log(
            AuditEventKind::QuestionAsked,
            Some(to),
            json!({ "outcome": "done", "reason": reason }),
        )?;
        step.guard.interview = Some(state);
        step.commit(to);
        Ok(InterviewStep {
            next: NextQuestion::Done { reason },
            status: to,
        })
    }

    /// Plans, fans out and consolidates in one request.
    pub async fn research(&self, token: &str, matter_id: &str) -> Result<ResearchSummary> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        if from != SessionStatus::ComprehensiveCleared {
            return Err(illegal(from, "start research"));
        }
        let query = step.guard.research_query(self.max_results)?;
        let plan = match build_query_plan(&query, &self.routing) {
            Ok(p) => p,
            Err(ResearchError::NoEligibleProviders(_)) => QueryPlan::empty(),
            Err(e) => return Err(OrchestratorError::Validation(e.to_string())),
        };
        let registered = self.registry.providers();
        let skipped: Vec<_> = plan
            .providers()
            .into_iter()
            .filter(|p| !registered.contains(p))
            .collect();
        let plan = plan.restrict_to(&registered);
        step.log(
            AuditEventKind::ResearchDispatched,
            Some(SessionStatus::Researching),
            json!({
                "providers": plan.providers(),
                "skipped": skipped,
                "term_count": query.terms.len(),
                "issue_category": query.issue_category,
                "jurisdiction": query.jurisdiction,
            }),
        )?;
        step.guard.query = Some(query.clone());
        step.commit(SessionStatus::Researching);

        let fanout = execute_plan(&plan, &self.registry)
            .await
            .map_err(|e| OrchestratorError::Internal(e.to_string()));
        let consolidated = fanout.clone().and_then(|f| {
            consolidate(&f.results, &query, &self.ranking, self.clock.now())
                .map_err(|e| OrchestratorError::Internal(e.to_string()))
                .map(|c| (f, c))
        });
        let (fanout, consolidated) = match consolidated {
            Ok(v) => v,
            Err(e) => {
                step.log(
                    AuditEventKind::ResearchConsolidated,
                    Some(SessionStatus::TerminatedError),
                    json!({ "error": e.to_string() }),
                )?;
                step.commit(SessionStatus::TerminatedError);
                return Err(e);
            }
        };
        let per_provider: Vec<_> = fanout
            .runs
            .iter()
            .map(|r| json!({ "provider_id": r.provider_id, "results": r.result_count, "failure": r.failure }))
            .collect();
        step.log(
            AuditEventKind::ResearchConsolidated,
            Some(SessionStatus::Consolidating),
            json!({
                "raw_count": consolidated.raw_count,
                "unique_count": consolidated.authorities.len(),
                "unkeyable": consolidated.unkeyable.len(),
                "providers": per_provider,
            }),
        )?;
        let summary = ResearchSummary {
            status: SessionStatus::Consolidating,
            providers: plan.providers(),
            raw_count: consolidated.raw_count,
            unique_count: consolidated.authorities.len(),
            failures: fanout.failures.clone(),
        };
        step.guard.fanout = Some(fanout);
        step.guard.consolidated = Some(consolidated);
        step.commit(SessionStatus::Consolidating);
        Ok(summary)
    }

    pub async fn analyze(&self, token: &str, matter_id: &str) -> Result<AnalysisSummary> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        if from != SessionStatus::Consolidating {
            return Err(illegal(from, "run the analysis"));
        }
        let authorities: Vec<Authority> = step
            .guard
            .consolidated
            .as_ref()
            .map(|c| c.authorities.clone())
            .unwrap_or_default();
        let ctx = step.guard.adapter_context();
        let analysis = match self
            .adapter
            .analyze_matter(&ctx, &authorities)
            .await
            .and_then(|a| a.validate().map(|_| a))
        {
            Ok(a) => a,
            Err(LlmError::AdapterUnavailable(m)) => return Err(OrchestratorError::AdapterUnavailable(m)),
            Err(e) => {
                step.log(
                    AuditEventKind::AnalysisCompleted,
                    Some(SessionStatus::TerminatedError),
                    json!({ "error": e.to_string() }),
                )?;
                step.commit(SessionStatus::TerminatedError);
                return Err(OrchestratorError::Internal(e.to_string()));
            }
        };
        let checks = match &self.verifier {
            Some(v) => verify_citations_with(&analysis, &authorities, v.as_ref()).await,
            None => verify_citations(&analysis, &authorities),
        };
        let summary = AnalysisSummary {
            status: SessionStatus::Analyzed,
            legal_issues: analysis.legal_issues.len(),
            authority_hints: analysis.authority_hints.len(),
            resolved_hints: checks.iter().filter(|c| c.is_resolved()).count(),
        };
        step.log(
            AuditEventKind::AnalysisCompleted,
            Some(SessionStatus::Analyzed),
            json!({
                "material_facts": analysis.material_facts.len(),
                "legal_issues": summary.legal_issues,
                "authority_hints": summary.authority_hints,
                "resolved_hints": summary.resolved_hints,
            }),
        )?;
        step.guard.analysis = Some(analysis);
        step.guard.citation_checks = checks;
        step.commit(SessionStatus::Analyzed);
        Ok(summary)
    }

    /// Assembles the report on first request, then serves the stored one.
    pub async fn report(
        &self,
        token: &str,
        matter_id: &str,
        format: ReportFormat,
    ) -> Result<Vec<u8>> {
        Ok(render_report(&self.report_value(token, matter_id).await?, format))
    }

    pub async fn report_value(&self, token: &str, matter_id: &str) -> Result<AnalysisReport> {
        let mut step = self.open(token, matter_id, false).await?;
        let from = step.guard.status();
        match from {
            SessionStatus::ReportReady => {
                return Ok(step.guard.report.clone().expect("stored report"));
            }
            SessionStatus::Analyzed => {}
            _ => return Err(illegal(from, "produce the report")),
        }
        let r = &*step.guard;
        let authorities = r.consolidated.as_ref().map(|c| c.authorities.as_slice()).unwrap_or(&[]);
        let failures = r.fanout.as_ref().map(|f| f.failures.as_slice()).unwrap_or(&[]);
        let report = assemble_with_checks(
            r.analysis.as_ref().expect("analysis"),
            r.citation_checks.clone(),
            authorities,
            failures,
            matter_id,
            self.disclaimer.as_deref(),
            self.clock.now(),
        )
        .map_err(|e| OrchestratorError::Internal(e.to_string()))?;
        step.log(
            AuditEventKind::ReportGenerated,
            Some(SessionStatus::ReportReady),
            json!({
                "authorities": report.authorities.len(),
                "cited": report.cited.len(),
                "unverified": report.unverified_references.len(),
                "provider_failures": report.provider_failures.len(),
                "sha256": sha256_hex(&render_report(&report, ReportFormat::Json)),
            }),
        )?;
        step.guard.report = Some(report.clone());
        step.commit(SessionStatus::ReportReady);
        Ok(report)
    }

    /// A copy of the matter's full state.
    pub async fn record(&self, token: &str, matter_id: &str) -> Result<MatterRecord> {
        let step = self.open(token, matter_id, true).await?;
        Ok(step.guard.clone())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
