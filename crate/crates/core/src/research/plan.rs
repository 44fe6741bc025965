use std::collections::HashSet;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    translate_query, GenericQuery, ProviderDescriptor, ProviderId, ProviderQuery, ResearchError,
    DEFAULT_PROVIDER_TIMEOUT,
};
use crate::domain::IssueCategory;

const DEFAULT_ROUTING: &str = include_str!("../../data/routing.json");

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleWhen {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<IssueCategory>,
}

impl RuleWhen {
    fn matches(&self, q: &GenericQuery) -> bool {
        self.country
            .as_deref()
            .is_none_or(|c| c == q.jurisdiction.country())
            && self.category.is_none_or(|c| c == q.issue_category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingRule {
    #[serde(default)]
    pub when: RuleWhen,
    pub order: Vec<ProviderId>,
}

/// Ordered routing rules; the first rule whose predicate matches decides
/// the provider order. Providers outside their coverage are then dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingTable {
    pub rules: Vec<RoutingRule>,
    /// Per-provider deadline overrides in milliseconds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timeouts_ms: Vec<(ProviderId, u64)>,
    #[serde(skip)]
    pub default_timeout: Option<Duration>,
}

impl Default for RoutingTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_ROUTING).expect("bundled routing table is valid")
    }
}

impl RoutingTable {
    pub fn from_json(json: &str) -> Result<Self, ResearchError> {
        let table: RoutingTable = serde_json::from_str(json)
            .map_err(|e| ResearchError::InvalidRoutingTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ResearchError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| {
            ResearchError::InvalidRoutingTable(format!("{}: {e}", path.display()))
        })?;
        Self::from_json(&json)
    }

    pub fn validate(&self) -> Result<(), ResearchError> {
        if self.rules.is_empty() {
            return Err(ResearchError::InvalidRoutingTable("no rules".into()));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            let mut seen = HashSet::new();
            for p in &rule.order {
                if !seen.insert(p) {
                    return Err(ResearchError::InvalidRoutingTable(format!(
                        "rule {i} lists {p} twice"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_default_timeout(mut self, timeout: Duration) -> Self {
        self.default_timeout = Some(timeout);
        self
    }

    pub fn with_timeout(mut self, provider: ProviderId, timeout: Duration) -> Self {
        self.timeouts_ms.retain(|(p, _)| *p != provider);
        self.timeouts_ms.push((provider, timeout.as_millis() as u64));
        self
    }

    fn timeout_for(&self, provider: ProviderId) -> Duration {
        self.timeouts_ms
            .iter()
            .find(|(p, _)| *p == provider)
            .map(|(_, ms)| Duration::from_millis(*ms))
            .or(self.default_timeout)
            .unwrap_or(DEFAULT_PROVIDER_TIMEOUT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedCall {
    pub provider: ProviderDescriptor,
    pub query: ProviderQuery,
}

/// Provider calls in priority order. Order feeds ranking tie-breaks;
/// execution is concurrent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub calls: Vec<PlannedCall>,
    pub rationale: String,
}

impl QueryPlan {
    pub fn empty() -> Self {
        Self {
            calls: Vec::new(),
            rationale: "empty plan".into(),
        }
    }

    pub fn providers(&self) -> Vec<ProviderId> {
        self.calls.iter().map(|c| c.provider.provider_id).collect()
    }

    /// Keeps only the listed providers, preserving order.
    pub fn restrict_to(mut self, keep: &[ProviderId]) -> Self {
        self.calls.retain(|c| keep.contains(&c.provider.provider_id));
        self
    }
}

pub fn build_query_plan(q: &GenericQuery, table: &RoutingTable) -> Result<QueryPlan, ResearchError> {
    q.validate()?;
    let (idx, rule) = table
        .rules
        .iter()
        .enumerate()
        .find(|(_, r)| r.when.matches(q))
        .ok_or_else(|| ResearchError::NoEligibleProviders(describe(q)))?;

    let country = q.jurisdiction.country();
    let mut dropped = Vec::new();
    let mut calls = Vec::new();
    for &provider in &rule.order {
        let coverage = provider.coverage();
        if !coverage.is_empty() && !coverage.contains(&country) {
            dropped.push(provider.as_str());
            continue;
        }
        let descriptor = ProviderDescriptor::new(provider, table.timeout_for(provider));
        let query = translate_query(q, descriptor.dialect)?;
        calls.push(PlannedCall {
            provider: descriptor,
            query,
        });
    }
    if calls.is_empty() {
        return Err(ResearchError::NoEligibleProviders(describe(q)));
    }

    let mut rationale = format!(
        "rule {idx} ({}) for {}",
        rule_label(rule),
        describe(q)
    );
    if !dropped.is_empty() {
        rationale.push_str(&format!("; outside coverage: {}", dropped.join(", ")));
    }
    Ok(QueryPlan { calls, rationale })
}

fn describe(q: &GenericQuery) -> String {
    format!("{}/{}", q.jurisdiction, q.issue_category.as_str())
}

fn rule_label(rule: &RoutingRule) -> String {
    format!(
        "country={}, category={}",
        rule.when.country.as_deref().unwrap_or("*"),
        rule.when.category.map_or("*", IssueCategory::as_str)
    )
}
