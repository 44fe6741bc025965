//! Append-only audit log. Each event is written and flushed before the
//! request that caused it returns. Party names never appear in clear.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::SessionStatus;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("audit log unavailable: {0}")]
pub struct AuditUnavailable(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuditEventKind {
    Registered,
    PrelimConflictChecked,
    ConflictTerminated,
    DocumentIngested,
    QuestionAsked,
    AnswerRecorded,
    ComprehensiveConflictChecked,
    ResearchDispatched,
    ResearchConsolidated,
    AnalysisCompleted,
    ReportGenerated,
}

impl AuditEventKind {
    pub const ALL: [AuditEventKind; 11] = [
        AuditEventKind::Registered,
        AuditEventKind::PrelimConflictChecked,
        AuditEventKind::ConflictTerminated,
        AuditEventKind::DocumentIngested,
        AuditEventKind::QuestionAsked,
        AuditEventKind::AnswerRecorded,
        AuditEventKind::ComprehensiveConflictChecked,
        AuditEventKind::ResearchDispatched,
        AuditEventKind::ResearchConsolidated,
        AuditEventKind::AnalysisCompleted,
        AuditEventKind::ReportGenerated,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: Option<SessionStatus>,
    pub to: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub matter_id: String,
    pub event: AuditEventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Transition>,
    pub detail: serde_json::Value,
}

/// Durable destination for serialized events, one line each.
pub trait AuditSink: Send + Sync {
    fn write_line(&self, line: &str) -> Result<(), AuditUnavailable>;
}

#[derive(Debug)]
pub struct FileSink {
    path: PathBuf,
    file: Mutex<File>,
}

impl FileSink {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AuditUnavailable> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| AuditUnavailable(e.to_string()))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| AuditUnavailable(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl AuditSink for FileSink {
    fn write_line(&self, line: &str) -> Result<(), AuditUnavailable> {
        let mut f = self
            .file
            .lock()
            .map_err(|_| AuditUnavailable("audit file lock poisoned".into()))?;
        writeln!(f, "{line}")
            .and_then(|_| f.flush())
            .and_then(|_| f.sync_data())
            .map_err(|e| AuditUnavailable(e.to_string()))
    }
}

#[derive(Debug, Default)]
pub struct MemorySink {
    lines: Mutex<Vec<String>>,
}

impl MemorySink {
    pub fn lines(&self) -> Vec<String> {
        self.lines.lock().unwrap().clone()
    }
}

impl AuditSink for MemorySink {
    fn write_line(&self, line: &str) -> Result<(), AuditUnavailable> {
        self.lines.lock().unwrap().push(line.to_string());
        Ok(())
    }
}

/// A sink that refuses every write.
#[derive(Debug, Default)]
pub struct FailingSink;

impl AuditSink for FailingSink {
    fn write_line(&self, _line: &str) -> Result<(), AuditUnavailable> {
        Err(AuditUnavailable("sink rejected write".into()))
    }
}

pub struct AuditLog {
    sink: Arc<dyn AuditSink>,
    salt: String,
    state: Mutex<LogState>,
}

#[derive(Default)]
struct LogState {
    seqs: HashMap<String, u64>,
    events: Vec<AuditEvent>,
}

impl AuditLog {
    pub fn new(sink: Arc<dyn AuditSink>, salt: impl Into<String>) -> Self {
        Self {
            sink,
            salt: salt.into(),
            state: Mutex::new(LogState::default()),
        }
    }

    /// Salted SHA-256 of a party name, hex encoded.
    pub fn party_hash(&self, name: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.salt.as_bytes());
        h.update(name.as_bytes());
        hex::encode(h.finalize())
    }

    /// Persists the event and returns its per-matter sequence number. The
    /// number is only consumed if the write succeeds.
    pub fn append(
        &self,
        matter_id: &str,
        event: AuditEventKind,
        transition: Option<Transition>,
        detail: serde_json::Value,
        timestamp: DateTime<Utc>,
    ) -> Result<u64, AuditUnavailable> {
        let mut state = self
            .state
            .lock()
            .map_err(|_| AuditUnavailable("audit state lock poisoned".into()))?;
        let seq = state.seqs.get(matter_id).copied().unwrap_or(0) + 1;
        let record = AuditEvent {
            seq,
            timestamp,
            matter_id: matter_id.to_string(),
            event,
            transition,
            detail,
        };
        let line = serde_json::to_string(&record).map_err(|e| AuditUnavailable(e.to_string()))?;
        self.sink.write_line(&line)?;
        state.seqs.insert(matter_id.to_string(), seq);
        state.events.push(record);
        Ok(seq)
    }

    pub fn events_for(&self, matter_id: &str) -> Vec<AuditEvent> {
        self.state
            .lock()
            .map(|s| s.events.iter().filter(|e| e.matter_id == matter_id).cloned().collect())
            .unwrap_or_default()
    }

    pub fn all_events(&self) -> Vec<AuditEvent> {
        self.state.lock().map(|s| s.events.clone()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn now() -> DateTime<Utc> {
        "2025-01-01T00:00:00Z".parse().unwrap()
    }

    #[test]
    fn seq_starts_at_one_per_matter() {
        let log = AuditLog::new(Arc::new(MemorySink::default()), "salt");
        assert_eq!(log.append("a", AuditEventKind::Registered, None, json!({}), now()).unwrap(), 1);
        assert_eq!(log.append("b", AuditEventKind::Registered, None, json!({}), now()).unwrap(), 1);
        assert_eq!(log.append("a", AuditEventKind::QuestionAsked, None, json!({}), now()).unwrap(), 2);
    }

    #[test]
    fn failed_write_consumes_nothing() {
        let log = AuditLog::new(Arc::new(FailingSink), "salt");
        assert!(log.append("a", AuditEventKind::Registered, None, json!({}), now()).is_err());
        assert!(log.events_for("a").is_empty());
    }

    #[test]
    fn names_are_hashed_with_salt() {
        let sink = Arc::new(MemorySink::default());
        let log = AuditLog::new(sink.clone(), "pepper");
        let h = log.party_hash("Acme Widgets");
        assert_eq!(h.len(), 64);
        assert_ne!(h, AuditLog::new(Arc::new(MemorySink::default()), "other").party_hash("Acme Widgets"));
        log.append("a", AuditEventKind::Registered, None, json!({ "parties": [h] }), now())
            .unwrap();
        assert!(!sink.lines()[0].contains("Acme"));
    }

    #[test]
    fn file_sink_appends_lines() {
        let dir = tempfile::tempdir().unwrap();
        let sink = Arc::new(FileSink::open(dir.path().join("audit/audit.jsonl")).unwrap());
        let log = AuditLog::new(sink.clone(), "s");
        log.append("a", AuditEventKind::Registered, None, json!({}), now()).unwrap();
        log.append("a", AuditEventKind::ReportGenerated, None, json!({}), now()).unwrap();
        let text = std::fs::read_to_string(sink.path()).unwrap();
        let events: Vec<AuditEvent> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(events.iter().map(|e| e.seq).collect::<Vec<_>>(), [1, 2]);
    }
}
