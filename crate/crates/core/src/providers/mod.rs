//! Search connectors over a local fixture corpus, standing in for the
//! commercial and public legal databases, plus an optional live CanLII
//! client.

mod canlii;
mod corpus;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::research::{
    parse_provider_query, ConnectorError, ConnectorRegistry, ProviderId, ProviderQuery,
    RawResult, SearchConnector,
};

pub use canlii::{CanliiHttpConnector, CANLII_API_KEY_ENV};
pub use corpus::{load_corpus, CorpusEntry, CorpusError, CorpusIndex};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    #[default]
    None,
    Timeout,
    Unavailable,
}

/// Latency and failure injection for one simulated provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimBehavior {
    #[serde(with = "crate::research::duration_ms", rename = "latency_ms")]
    pub latency: Duration,
    #[serde(default)]
    pub failure_mode: FailureMode,
    /// Upper bound of extra latency drawn per call; zero disables jitter.
    #[serde(default, with = "crate::research::duration_ms", rename = "jitter_ms")]
    pub jitter: Duration,
    #[serde(default)]
    pub seed: u64,
}

impl SimBehavior {
    pub fn with_latency(latency: Duration) -> Self {
        Self {
            latency,
            failure_mode: FailureMode::None,
            jitter: Duration::ZERO,
            seed: 0,
        }
    }

    pub fn failing(mut self, mode: FailureMode) -> Self {
        self.failure_mode = mode;
        self
    }

    /// Latency used for the `call`-th invocation (0-based).
    pub fn latency_for(&self, call: usize) -> Duration {
        if self.jitter.is_zero() {
            return self.latency;
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(self.seed ^ call as u64);
        let extra = rng.gen_range(0..=self.jitter.as_micros() as u64);
        self.latency + Duration::from_micros(extra)
    }
}

impl Default for SimBehavior {
    fn default() -> Self {
        Self::with_latency(Duration::ZERO)
    }
}

/// Default simulated latency per provider. The commercial and CanLII
/// figures are a tenth of the observed per-database processing times.
pub fn default_latency(id: ProviderId) -> Duration {
    Duration::from_millis(match id {
        ProviderId::LexisnexisSim => 320,
        ProviderId::WestlawSim => 280,
        ProviderId::Canlii => 110,
        ProviderId::JusticeLaws => 80,
        ProviderId::Scc => 60,
    })
}

/// A simulated provider answering from its slice of a shared corpus.
pub struct SimConnector {
    id: ProviderId,
    index: Arc<CorpusIndex>,
    behavior: SimBehavior,
    calls: AtomicUsize,
}

impl SimConnector {
    pub fn new(id: ProviderId, index: Arc<CorpusIndex>, behavior: SimBehavior) -> Self {
        Self {
            id,
            index,
            behavior,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn behavior(&self) -> SimBehavior {
        self.behavior
    }

    /// Number of `search` invocations so far.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl SearchConnector for SimConnector {
    fn provider_id(&self) -> ProviderId {
        self.id
    }

    async fn search(&self, query: &ProviderQuery) -> Result<Vec<RawResult>, ConnectorError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        tokio::time::sleep(self.behavior.latency_for(call)).await;
        match self.behavior.failure_mode {
            FailureMode::None => {}
            FailureMode::Timeout => {
                return Err(ConnectorError::Timeout(format!("{} simulated timeout", self.id)))
            }
            FailureMode::Unavailable => {
                return Err(ConnectorError::Unavailable(format!(
                    "{} simulated outage",
                    self.id
                )))
            }
        }
        if query.dialect != self.id.dialect() {
            return Err(ConnectorError::BadQuery(format!(
                "{} does not speak {:?}",
                self.id, query.dialect
            )));
        }
        let parsed = parse_provider_query(query).map_err(|e| ConnectorError::BadQuery(e.to_string()))?;
        Ok(self.index.search(self.id, &parsed, query.max_results))
    }
}

/// The five simulators over one corpus, kept addressable so tests can read
/// their call counters.
#[derive(Clone)]
pub struct SimFleet {
    pub connectors: Vec<Arc<SimConnector>>,
}

impl SimFleet {
    pub fn new(index: Arc<CorpusIndex>, behavior: impl Fn(ProviderId) -> SimBehavior) -> Self {
        Self {
            connectors: ProviderId::ALL
                .into_iter()
                .map(|id| Arc::new(SimConnector::new(id, index.clone(), behavior(id))))
                .collect(),
        }
    }

    /// All simulators with zero latency and no failures.
    pub fn instant(index: Arc<CorpusIndex>) -> Self {
        Self::new(index, |_| SimBehavior::default())
    }

    pub fn registry(&self) -> ConnectorRegistry {
        let mut reg = ConnectorRegistry::new();
        for c in &self.connectors {
            reg.register(c.clone() as Arc<dyn SearchConnector>);
        }
        reg
    }

    pub fn get(&self, id: ProviderId) -> Option<&Arc<SimConnector>> {
        self.connectors.iter().find(|c| c.id == id)
    }

    pub fn total_calls(&self) -> usize {
        self.connectors.iter().map(|c| c.call_count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_jurisdiction, IssueCategory};
    use crate::research::{translate_query, GenericQuery};
    use std::time::Instant;

    const CORPUS: &str = concat!(
        r#"{"provider_id":"canlii","doc_id":"CL-1","title":"A v. B","citation_string":"2015 ONCA 1","court":"ONCA","jurisdiction":"CA-ON","date":"2015-01-01","headnote":"lease breach lease","body":"x","url":"u"}"#,
        "\n"
    );

    fn query(id: ProviderId) -> ProviderQuery {
        let q = GenericQuery::new(["lease"], parse_jurisdiction("CA").unwrap(), IssueCategory::CaseLaw);
        translate_query(&q, id.dialect()).unwrap()
    }

    #[tokio::test]
    async fn latency_is_honoured_and_counted() {
        let index = Arc::new(CorpusIndex::from_jsonl(CORPUS).unwrap());
        let sim = SimConnector::new(
            ProviderId::Canlii,
            index,
            SimBehavior::with_latency(Duration::from_millis(40)),
        );
        let t = Instant::now();
        let hits = sim.search(&query(ProviderId::Canlii)).await.unwrap();
        assert!(t.elapsed() >= Duration::from_millis(40));
        assert_eq!(hits.len(), 1);
        assert_eq!(sim.call_count(), 1);
    }

    #[tokio::test]
    async fn failure_injection_overrides_query() {
        let index = Arc::new(CorpusIndex::from_jsonl(CORPUS).unwrap());
        for (mode, want) in [
            (FailureMode::Unavailable, "Unavailable"),
            (FailureMode::Timeout, "Timeout"),
        ] {
            let sim = SimConnector::new(
                ProviderId::Canlii,
                index.clone(),
                SimBehavior::default().failing(mode),
            );
            let err = sim.search(&query(ProviderId::Canlii)).await.unwrap_err();
            assert!(format!("{err:?}").starts_with(want));
        }
    }

    #[tokio::test]
    async fn wrong_dialect_is_bad_query() {
        let index = Arc::new(CorpusIndex::from_jsonl(CORPUS).unwrap());
        let sim = SimConnector::new(ProviderId::Canlii, index, SimBehavior::default());
        let err = sim.search(&query(ProviderId::Scc)).await.unwrap_err();
        assert!(matches!(err, ConnectorError::BadQuery(_)));
    }

    #[test]
    fn jitter_is_seeded() {
        let b = SimBehavior {
            jitter: Duration::from_millis(10),
            seed: 7,
            ..SimBehavior::with_latency(Duration::from_millis(5))
        };
        assert_eq!(b.latency_for(3), b.latency_for(3));
        assert!(b.latency_for(3) >= Duration::from_millis(5));
        assert!(b.latency_for(3) <= Duration::from_millis(15));
    }

    #[test]
    fn behavior_config_shape() {
        let b: SimBehavior =
            serde_json::from_str(r#"{"latency_ms":320,"failure_mode":"unavailable"}"#).unwrap();
        assert_eq!(b.latency, Duration::from_millis(320));
        assert_eq!(b.failure_mode, FailureMode::Unavailable);
    }
}
