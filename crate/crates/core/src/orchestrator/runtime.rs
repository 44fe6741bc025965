use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use super::audit::{AuditSink, FileSink, MemorySink};
use super::Orchestrator;
use crate::clock::{Clock, FixedClock, SystemClock};
use crate::config::{ConfigError, LicesConfig};
use crate::conflict::{ConflictChecker, ConflictStore};
use crate::llm::{HttpLlmAdapter, HttpVerifier, LlmAdapter, ScriptedStub, StubScript};
use crate::providers::{
    default_latency, load_corpus, CanliiHttpConnector, CorpusIndex, SimBehavior, SimConnector,
    SimFleet,
};
use crate::research::{ConnectorRegistry, ProviderId, RoutingTable, SearchConnector};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no stub script configured and no live adapter")]
    MissingStubScript,
    #[error("{0}")]
    Setup(String),
}

/// Optional replacements for what the config file would provide.
#[derive(Default)]
pub struct RuntimeOverrides {
    pub stub_script: Option<StubScript>,
    pub conflicts: Option<ConflictStore>,
    pub audit_sink: Option<Arc<dyn AuditSink>>,
    pub clock: Option<Arc<dyn Clock>>,
}

/// A wired orchestrator plus handles tests and the CLI need.
pub struct Runtime {
    pub orchestrator: Arc<Orchestrator>,
    /// Simulated providers; a live CanLII connector replaces its simulator
    /// in the registry but the simulator stays here.
    pub fleet: SimFleet,
    pub audit_path: Option<PathBuf>,
}

impl Runtime {
    pub fn from_config(cfg: &LicesConfig) -> Result<Self, RuntimeError> {
        Self::with_overrides(cfg, RuntimeOverrides::default())
    }

    pub fn with_overrides(cfg: &LicesConfig, o: RuntimeOverrides) -> Result<Self, RuntimeError> {
        cfg.validate()?;
        let setup = |e: &dyn std::fmt::Display| RuntimeError::Setup(e.to_string());

        let adapter: Arc<dyn LlmAdapter> = match (&cfg.llm.live, o.stub_script) {
            (_, Some(script)) => Arc::new(ScriptedStub::new(script)),
            (Some(live), None) => Arc::new(HttpLlmAdapter::new(live).map_err(|e| setup(&e))?),
            (None, None) => match &cfg.llm.stub_script {
                Some(path) if path.exists() => {
                    Arc::new(ScriptedStub::load(path).map_err(|e| setup(&e))?)
                }
                _ => return Err(RuntimeError::MissingStubScript),
            },
        };

        let shared = match &cfg.research.corpus {
            Some(path) => load_corpus(path).map_err(|e| setup(&e))?,
            None => CorpusIndex::default(),
        };
        let shared = Arc::new(shared);
        let mut connectors = Vec::new();
        for id in ProviderId::ALL {
            let section = cfg.research.providers.get(&id).cloned().unwrap_or_default();
            let index = match &section.corpus_path {
                Some(path) => Arc::new(load_corpus(path).map_err(|e| setup(&e))?),
                None => shared.clone(),
            };
            let behavior = SimBehavior {
                latency: section
                    .latency_ms
                    .map(Duration::from_millis)
                    .unwrap_or_else(|| default_latency(id)),
                failure_mode: section.failure_mode,
                jitter: Duration::from_millis(section.jitter_ms),
                seed: section.seed,
            };
            connectors.push(Arc::new(SimConnector::new(id, index, behavior)));
        }
        let fleet = SimFleet { connectors };
        let mut registry = ConnectorRegistry::new();
        for c in &fleet.connectors {
            registry.register(c.clone() as Arc<dyn SearchConnector>);
        }
        if let Some(section) = cfg.research.providers.get(&ProviderId::Canlii) {
            if section.live {
                let live = CanliiHttpConnector::from_env(section.databases.clone())
                    .map_err(|e| setup(&e))?;
                registry.register(Arc::new(live));
            }
        }

        let mut routing = match &cfg.research.routing {
            Some(path) => RoutingTable::load(path).map_err(|e| setup(&e))?,
            None => RoutingTable::default(),
        }
        .with_default_timeout(Duration::from_millis(cfg.research.default_timeout_ms));
        for (id, section) in &cfg.research.providers {
            if let Some(ms) = section.timeout_ms {
                routing = routing.with_timeout(*id, Duration::from_millis(ms));
            }
        }

        let conflicts = match (o.conflicts, &cfg.conflict.db) {
            (Some(store), _) => store,
            (None, Some(path)) => ConflictStore::open(path).map_err(|e| setup(&e))?,
            (None, None) => ConflictStore::in_memory(Vec::new()).map_err(|e| setup(&e))?,
        };
        let checker = ConflictChecker::new(cfg.conflict.threshold).map_err(|e| setup(&e))?;

        let clock: Arc<dyn Clock> = match (o.clock, cfg.determinism.clock) {
            (Some(c), _) => c,
            (None, Some(t)) => Arc::new(FixedClock(t)),
            (None, None) => Arc::new(SystemClock),
        };

        let mut audit_path = None;
        let sink: Arc<dyn AuditSink> = match (o.audit_sink, &cfg.data_dir) {
            (Some(s), _) => s,
            (None, Some(dir)) => {
                let path = dir.join("audit.jsonl");
                let sink = FileSink::open(&path).map_err(|e| setup(&e))?;
                audit_path = Some(path);
                Arc::new(sink)
            }
            (None, None) => Arc::new(MemorySink::default()),
        };

        let mut b = Orchestrator::builder(adapter, registry)
            .clock(clock)
            .audit_sink(sink)
            .conflicts(Arc::new(conflicts))
            .checker(checker)
            .routing(routing)
            .ranking(cfg.ranking_config()?)
            .disclaimer(cfg.report.disclaimer.clone())
            .max_rounds(cfg.interview.max_rounds)
            .max_results_per_provider(cfg.research.max_results_per_provider)
            .idle_timeout(chrono::Duration::minutes(cfg.session.idle_minutes));
        if let Some(salt) = &cfg.determinism.salt {
            b = b.salt(salt.clone());
        }
        if let Some(dir) = &cfg.data_dir {
            b = b.data_dir(dir.clone());
        }
        if cfg.llm.verifier {
            let live = cfg.llm.live.as_ref().expect("validated");
            b = b.verifier(Arc::new(HttpVerifier::new(live).map_err(|e| setup(&e))?));
        }
        Ok(Self {
            orchestrator: Arc::new(b.build()),
            fleet,
            audit_path,
        })
    }
}
