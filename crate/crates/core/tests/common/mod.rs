#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use lices::config::LicesConfig;
use lices::orchestrator::audit::{AuditEvent, MemorySink};
use lices::orchestrator::{Runtime, RuntimeOverrides};
use lices::scenario::Scenario;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn scenario_dir(name: &str) -> PathBuf {
    fixtures().join("scenarios").join(name)
}

pub fn config() -> LicesConfig {
    LicesConfig::load(fixtures().join("lices.toml")).unwrap()
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(scenario_dir(name)).unwrap()
}

/// Runtime for a scenario with an in-memory audit sink.
pub fn runtime(name: &str, cfg: &LicesConfig) -> (Runtime, Scenario, Arc<MemorySink>) {
    let s = scenario(name);
    let sink = Arc::new(MemorySink::default());
    let conflicts = s
        .conflict_db
        .as_ref()
        .map(|p| lices::conflict::ConflictStore::open(p).unwrap());
    let rt = Runtime::with_overrides(
        cfg,
        RuntimeOverrides {
            stub_script: s.stub_script.clone(),
            conflicts,
            audit_sink: Some(sink.clone()),
            clock: None,
        },
    )
    .unwrap();
    (rt, s, sink)
}

pub fn parse_events(sink: &MemorySink) -> Vec<AuditEvent> {
    sink.lines()
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
