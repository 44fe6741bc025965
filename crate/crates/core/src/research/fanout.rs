use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ProviderId, ProviderQuery, QueryPlan, RawResult, ResearchError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectorError {
    #[error("provider timed out: {0}")]
    Timeout(String),
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("provider rejected query: {0}")]
    BadQuery(String),
}

impl ConnectorError {
    pub fn reason(&self) -> FailureReason {
        match self {
            ConnectorError::Timeout(_) => FailureReason::Timeout,
            ConnectorError::Unavailable(_) => FailureReason::Unavailable,
            ConnectorError::BadQuery(_) => FailureReason::BadQuery,
        }
    }
}

/// A searchable legal source. Implementations must tolerate concurrent
/// calls from different matters.
#[async_trait]
pub trait SearchConnector: Send + Sync {
    fn provider_id(&self) -> ProviderId;

    async fn search(&self, query: &ProviderQuery) -> Result<Vec<RawResult>, ConnectorError>;
}

#[derive(Clone, Default)]
pub struct ConnectorRegistry {
    connectors: HashMap<ProviderId, Arc<dyn SearchConnector>>,
}

impl ConnectorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, connector: Arc<dyn SearchConnector>) -> &mut Self {
        self.connectors.insert(connector.provider_id(), connector);
        self
    }

    pub fn with(mut self, connector: Arc<dyn SearchConnector>) -> Self {
        self.register(connector);
        self
    }

    pub fn get(&self, id: ProviderId) -> Option<&Arc<dyn SearchConnector>> {
        self.connectors.get(&id)
    }

    pub fn providers(&self) -> Vec<ProviderId> {
        let mut ids: Vec<_> = self.connectors.keys().copied().collect();
        ids.sort();
        ids
    }
}

impl std::fmt::Debug for ConnectorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConnectorRegistry")
            .field("providers", &self.providers())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    Timeout,
    Unavailable,
    BadQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderFailure {
    pub provider_id: ProviderId,
    pub reason: FailureReason,
    #[serde(default)]
    pub detail: String,
}

/// Per-provider accounting for one fan-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRun {
    pub provider_id: ProviderId,
    pub result_count: usize,
    #[serde(with = "super::duration_ms")]
    pub elapsed: Duration,
    pub failure: Option<FailureReason>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanoutOutcome {
    pub results: Vec<RawResult>,
    pub failures: Vec<ProviderFailure>,
    pub runs: Vec<ProviderRun>,
    #[serde(with = "super::duration_ms")]
    pub wall_time: Duration,
}

impl FanoutOutcome {
    /// Providers that answered, whether or not they found anything.
    pub fn contributors(&self) -> Vec<ProviderId> {
        self.runs
            .iter()
            .filter(|r| r.failure.is_none())
            .map(|r| r.provider_id)
            .collect()
    }
}

/// Starts every planned call at once, each under its own deadline, and
/// joins them. Late or failing providers are reported in `failures`; the
/// rest of the results are still returned.
pub async fn execute_plan(
    plan: &QueryPlan,
    registry: &ConnectorRegistry,
) -> Result<FanoutOutcome, ResearchError> {
    let mut jobs = Vec::with_capacity(plan.calls.len());
    for call in &plan.calls {
        let id = call.provider.provider_id;
        let connector = registry
            .get(id)
            .cloned()
            .ok_or(ResearchError::PlanRegistryMismatch(id))?;
        jobs.push((id, call.provider.timeout, call.query.clone(), connector));
    }

    let started = Instant::now();
    let handles: Vec<_> = jobs
        .into_iter()
        .map(|(id, deadline, query, connector)| {
            let handle = tokio::spawn(async move {
                let t0 = Instant::now();
                let outcome = match tokio::time::timeout(deadline, connector.search(&query)).await {
                    Ok(r) => r,
                    Err(_) => Err(ConnectorError::Timeout(format!(
                        "no answer within {} ms",
                        deadline.as_millis()
                    ))),
                };
                (outcome.map(|mut rs| {
                    rs.truncate(query.max_results);
                    rs
                }), t0.elapsed())
            });
            (id, handle)
        })
        .collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut runs = Vec::new();
    for (id, handle) in handles {
        let (outcome, elapsed) = match handle.await {
            Ok(v) => v,
            Err(e) => (
                Err(ConnectorError::Unavailable(format!("connector task failed: {e}"))),
                started.elapsed(),
            ),
        };
        match outcome {
            Ok(batch) => {
                let mut seen = HashSet::new();
                let batch: Vec<_> = batch
                    .into_iter()
                    .filter(|r| seen.insert((r.provider_id, r.doc_id.clone())))
                    .collect();
                runs.push(ProviderRun {
                    provider_id: id,
                    result_count: batch.len(),
                    elapsed,
                    failure: None,
                });
                results.extend(batch);
            }
            Err(e) => {
                log::warn!("provider {id} failed: {e}");
                runs.push(ProviderRun {
                    provider_id: id,
                    result_count: 0,
                    elapsed,
                    failure: Some(e.reason()),
                });
                failures.push(ProviderFailure {
                    provider_id: id,
                    reason: e.reason(),
                    detail: e.to_string(),
                });
            }
        }
    }
    Ok(FanoutOutcome {
        results,
        failures,
        runs,
        wall_time: started.elapsed(),
    })
}
