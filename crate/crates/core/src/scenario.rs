//! Offline pipeline runs from a scenario directory:
//!
//! ```text
//! scenario.json       client, summary, categories, research terms, answers
//! documents/          uploaded in file-name order
//! stub_script.json    optional; otherwise the config's llm.stub_script
//! conflict_db.jsonl   optional; otherwise the config's conflict.db
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, LicesConfig};
use crate::conflict::{CheckStage, ConflictStore};
use crate::domain::{IssueCategory, SessionStatus};
use crate::interview::NextQuestion;
use crate::llm::StubScript;
use crate::orchestrator::{
    NewClient, NewMatter, Orchestrator, OrchestratorError, Runtime, RuntimeError,
    RuntimeOverrides, Upload,
};
use crate::report::{render_report, AnalysisReport, ReportFormat};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("config: {0}")]
    Setup(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("pipeline: {0}")]
    Pipeline(#[from] OrchestratorError),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl RunError {
    /// 1 for configuration problems, 2 for fixture problems, 4 when the
    /// pipeline itself failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Setup(_) => 1,
            RunError::Fixture(_) => 2,
            RunError::Pipeline(_) | RunError::Output { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub client: NewClient,
    pub summary: String,
    #[serde(default)]
    pub issue_categories: Vec<IssueCategory>,
    #[serde(default)]
    pub research_terms: Vec<String>,
    /// Answers given in order; the client ends the interview once they
    /// run out.
    #[serde(default)]
    pub answers: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub documents: Vec<Upload>,
    pub stub_script: Option<StubScript>,
    pub conflict_db: Option<PathBuf>,
}

impl Scenario {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, RunError> {
        let dir = dir.as_ref();
        let fixture = |e: &dyn std::fmt::Display| RunError::Fixture(e.to_string());
        let spec = dir.join("scenario.json");
        let text = std::fs::read_to_string(&spec)
            .map_err(|e| RunError::Fixture(format!("{}: {e}", spec.display())))?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| RunError::Fixture(format!("{}: {e}", spec.display())))?;

        let mut documents = Vec::new();
        let docs = dir.join("documents");
        if docs.is_dir() {
            let mut paths: Vec<_> = std::fs::read_dir(&docs)
                .map_err(|e| fixture(&e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            for p in paths {
                let bytes = std::fs::read(&p).map_err(|e| fixture(&e))?;
                documents.push(Upload {
                    filename: p.file_name().unwrap().to_string_lossy().into_owned(),
                    bytes,
                });
            }
        }

        let stub_path = dir.join("stub_script.json");
        let stub_script = if stub_path.exists() {
            Some(StubScript::load(&stub_path).map_err(|e| fixture(&e))?)
        } else {
            None
        };
        let db = dir.join("conflict_db.jsonl");
        Ok(Self {
            file,
            documents,
            stub_script,
            conflict_db: db.exists().then_some(db),
        })
    }

    /// Builds the runtime: scenario stub and conflict db override the
    /// config's.
    pub fn runtime(&self, cfg: &LicesConfig) -> Result<Runtime, RunError> {
        let conflicts = match &self.conflict_db {
            Some(p) => Some(ConflictStore::open(p).map_err(|e| RunError::Fixture(e.to_string()))?),
            None => None,
        };
        Runtime::with_overrides(
            cfg,
            RuntimeOverrides {
                stub_script: self.stub_script.clone(),
                conflicts,
                ..Default::default()
            },
        )
        .map_err(|e| match e {
            RuntimeError::Config(c) => RunError::Config(c),
            other => RunError::Setup(other.to_string()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct DriveOutcome {
    pub matter_id: String,
    pub session_token: String,
    pub status: SessionStatus,
    pub report: Option<AnalysisReport>,
    /// Service operations issued, one per HTTP request equivalent.
    pub api_calls: usize,
}

/// Walks one matter through every stage, stopping at the first terminal
/// status.
pub async fn drive(orch: &Orchestrator, s: &ScenarioFile, documents: &[Upload]) -> Result<DriveOutcome, OrchestratorError> {
    let mut calls = 1;
    let created = orch.create_matter(NewMatter {
        client_id: None,
        client: Some(s.client.clone()),
        summary: s.summary.clone(),
        issue_categories: s.issue_categories.clone(),
        research_terms: s.research_terms.clone(),
    })?;
    let (id, tok) = (created.matter_id.clone(), created.session_token.clone());
    let done = |status, report, calls| DriveOutcome {
        matter_id: id.clone(),
        session_token: tok.clone(),
        status,
        report,
        api_calls: calls,
    };

    calls += 1;
    let prelim = orch.conflict_check(&tok, &id, CheckStage::Preliminary).await?;
    if prelim.status.is_terminal() {
        return Ok(done(prelim.status, None, calls));
    }
    calls += 1;
    orch.upload_documents(&tok, &id, documents.to_vec()).await?;

    let mut answers = s.answers.iter();
    loop {
        calls += 1;
        let step = orch.next_question(&tok, &id).await?;
        let NextQuestion::Question(q) = step.next else { break };
        calls += 1;
        match answers.next() {
            Some(a) => {
                if orch.answer(&tok, &id, &q.question_id, a).await?.interview_complete {
                    break;
                }
            }
            None => {
                orch.finish_interview(&tok, &id).await?;
                break;
            }
        }
    }

    calls += 1;
    let comp = orch.conflict_check(&tok, &id, CheckStage::Comprehensive).await?;
    if comp.status.is_terminal() {
        return Ok(done(comp.status, None, calls));
    }
    calls += 1;
    orch.research(&tok, &id).await?;
    calls += 1;
    orch.analyze(&tok, &id).await?;
    calls += 1;
    let report = orch.report_value(&tok, &id).await?;
    Ok(done(SessionStatus::ReportReady, Some(report), calls))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub drive: DriveOutcome,
    pub out_dir: PathBuf,
    /// Connector invocations over the whole run.
    pub connector_calls: usize,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.drive.status {
            SessionStatus::ReportReady => 0,
            SessionStatus::TerminatedConflict => 3,
            _ => 4,
        }
    }
}

/// `lices run`: loads everything, drives the matter and writes
/// `report.json`, `report.md` and `audit.jsonl` into `out_dir`.
pub async fn run(
    config: &Path,
    scenario_dir: &Path,
    out_dir: &Path,
) -> Result<RunOutcome, RunError> {
    let mut cfg = LicesConfig::load(config)?;
    cfg.data_dir = Some(out_dir.to_path_buf());
    let scenario = Scenario::load(scenario_dir)?;
    let rt = scenario.runtime(&cfg)?;
    let drive = drive(&rt.orchestrator, &scenario.file, &scenario.documents).await?;
    if let Some(report) = &drive.report {
        for (name, fmt) in [("report.json", ReportFormat::Json), ("report.md", ReportFormat::Markdown)] {
            let path = out_dir.join(name);
            std::fs::write(&path, render_report(report, fmt)).map_err(|e| RunError::Output {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
    }
    Ok(RunOutcome {
        drive,
        out_dir: out_dir.to_path_buf(),
        connector_calls: rt.fleet.total_calls(),
    })
}

/// Keeps the runtime alive alongside an outcome, for callers that inspect
/// audit events or counters afterwards.
pub async fn run_in(rt: &Runtime, scenario: &Scenario) -> Result<DriveOutcome, OrchestratorError> {
    let orch: &Arc<Orchestrator> = &rt.orchestrator;
    drive(orch, &scenario.file, &scenario.documents).await
}
