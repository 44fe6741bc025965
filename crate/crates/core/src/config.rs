//! TOML configuration. Relative paths are resolved against the directory
//! of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consolidation::{CourtTable, RankingConfig, RelevanceWeights};
use crate::interview::DEFAULT_MAX_ROUNDS;
use crate::llm::LiveAdapterConfig;
use crate::providers::FailureMode;
use crate::report::DEFAULT_DISCLAIMER;
use crate::research::{ProviderId, DEFAULT_MAX_RESULTS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct LicesConfig {
    /// Audit log and per-matter state files live here.
    pub data_dir: Option<PathBuf>,
    pub conflict: ConflictSection,
    pub interview: InterviewSection,
    pub llm: LlmSection,
    pub research: ResearchSection,
    pub ranking: RankingSection,
    pub report: ReportSection,
    pub session: SessionSection,
    pub determinism: DeterminismSection,
    pub server: ServerSection,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConflictSection {
    pub db: Option<PathBuf>,
    pub threshold: f64,
}

impl Default for ConflictSection {
    fn default() -> Self {
        Self {
            db: None,
            threshold: crate::conflict::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterviewSection {
    pub max_rounds: u32,
}

impl Default for InterviewSection {
    fn default() -> Self {
        Self {
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmSection {
    pub stub_script: Option<PathBuf>,
    /// Uses the HTTP adapter instead of the stub when present.
    pub live: Option<LiveAdapterConfig>,
    /// Second-opinion citation checks through `live`'s gateway.
    pub verifier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResearchSection {
    pub routing: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub default_timeout_ms: u64,
    pub max_results_per_provider: usize,
    pub providers: BTreeMap<ProviderId, ProviderSection>,
}

impl Default for ResearchSection {
    fn default() -> Self {
        Self {
            routing: None,
            corpus: None,
            default_timeout_ms: crate::research::DEFAULT_PROVIDER_TIMEOUT.as_millis() as u64,
            max_results_per_provider: DEFAULT_MAX_RESULTS,
            providers: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderSection {
    pub latency_ms: Option<u64>,
    pub failure_mode: FailureMode,
    pub jitter_ms: u64,
    pub seed: u64,
    pub corpus_path: Option<PathBuf>,
    pub timeout_ms: Option<u64>,
    /// CanLII only: query the live API instead of the simulator.
    pub live: bool,
    /// CanLII only: database ids to browse when live.
    pub databases: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankingSection {
    pub weights: Option<RelevanceWeights>,
    /// JSON court table replacing the bundled one.
    pub courts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Mandatory; an empty value makes report assembly fail.
    pub disclaimer: Option<String>,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            disclaimer: Some(DEFAULT_DISCLAIMER.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionSection {
    pub idle_minutes: i64,
}

impl Default for SessionSection {
    fn default() -> Self {
        Self { idle_minutes: 60 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeterminismSection {
    /// Fixed instant used for every timestamp.
    pub clock: Option<DateTime<Utc>>,
    /// Salt for audit-log party hashes; random per process when absent.
    pub salt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServerSection {
    pub bind: String,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
        }
    }
}

impl LicesConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.conflict.threshold > 0.0 && self.conflict.threshold <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "conflict.threshold {} outside (0, 1]",
                self.conflict.threshold
            )));
        }
        if let Some(w) = &self.ranking.weights {
            w.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if self.session.idle_minutes <= 0 {
            return Err(ConfigError::Invalid("session.idle_minutes must be positive".into()));
        }
        if self.research.max_results_per_provider == 0 {
            return Err(ConfigError::Invalid(
                "research.max_results_per_provider must be positive".into(),
            ));
        }
        if self.llm.verifier && self.llm.live.is_none() {
            return Err(ConfigError::Invalid("llm.verifier needs an llm.live gateway".into()));
        }
        Ok(())
    }

    /// Makes every relative path absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.conflict.db);
        fix(&mut self.llm.stub_script);
        fix(&mut self.research.routing);
        fix(&mut self.research.corpus);
        fix(&mut self.ranking.courts);
        for p in self.research.providers.values_mut() {
            fix(&mut p.corpus_path);
        }
    }

    pub fn ranking_config(&self) -> Result<RankingConfig, ConfigError> {
        let courts = match &self.ranking.courts {
            Some(path) => {
                let json = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                CourtTable::from_json(&json).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            None => CourtTable::default(),
        };
        Ok(RankingConfig {
            weights: self.ranking.weights.unwrap_or_default(),
            courts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_shape_parses() {
        let cfg = LicesConfig::from_toml(
            r#"
            data_dir = "out"
            [conflict]
            db = "conflicts.jsonl"
            threshold = 0.85
            [interview]
            max_rounds = 6
            [llm]
            stub_script = "stub.json"
            [research]
            corpus = "corpus.jsonl"
            default_timeout_ms = 1000
            [research.providers.scc]
            latency_ms = 60
            failure_mode = "timeout"
            [ranking.weights]
            term = 0.4
            jurisdiction = 0.3
            court = 0.2
            recency = 0.1
            [report]
            disclaimer = "Not legal advice."
            [determinism]
            clock = "2025-01-01T12:00:00Z"
            salt = "s"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.interview.max_rounds, 6);
        assert_eq!(cfg.research.providers[&ProviderId::Scc].failure_mode, FailureMode::Timeout);
        assert_eq!(cfg.ranking_config().unwrap().weights.term, 0.4);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(LicesConfig::from_toml("[conflict]\nthreshold = 1.5").is_err());
        assert!(LicesConfig::from_toml("[ranking.weights]\nterm=1\njurisdiction=1\ncourt=0\nrecency=0").is_err());
        assert!(LicesConfig::from_toml("bogus = 1").is_err());
        assert!(LicesConfig::from_toml("[llm]\nverifier = true").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lices.toml");
        std::fs::write(&path, "[llm]\nstub_script = \"stub.json\"\n").unwrap();
        let cfg = LicesConfig::load(&path).unwrap();
        assert_eq!(cfg.llm.stub_script.unwrap(), dir.path().join("stub.json"));
    }
}
