//! Federated legal research: provider descriptors, jurisdiction-aware query
//! planning over the provider tiers, per-dialect query translation, and a
//! parallel fan-out with per-provider deadlines.

mod fanout;
mod plan;
mod translate;

use std::fmt;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{IssueCategory, Jurisdiction};

pub use fanout::{
    execute_plan, ConnectorError, ConnectorRegistry, FailureReason, FanoutOutcome,
    ProviderFailure, ProviderRun, SearchConnector,
};
pub use plan::{build_query_plan, PlannedCall, QueryPlan, RoutingRule, RoutingTable, RuleWhen};
pub use translate::{parse_provider_query, translate_query, ParsedQuery};

pub const DEFAULT_MAX_RESULTS: usize = 50;
pub const DEFAULT_PROVIDER_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Error)]
pub enum ResearchError {
    #[error("no eligible providers for {0}")]
    NoEligibleProviders(String),
    #[error("dialect {0:?} cannot express this query")]
    UnsupportedDialect(Dialect),
    #[error("provider {0} is planned but not registered")]
    PlanRegistryMismatch(ProviderId),
    #[error("invalid routing table: {0}")]
    InvalidRoutingTable(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ProviderId {
    LexisnexisSim,
    WestlawSim,
    Canlii,
    JusticeLaws,
    Scc,
}

impl ProviderId {
    pub const ALL: [ProviderId; 5] = [
        ProviderId::LexisnexisSim,
        ProviderId::WestlawSim,
        ProviderId::Canlii,
        ProviderId::JusticeLaws,
        ProviderId::Scc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProviderId::LexisnexisSim => "lexisnexis_sim",
            ProviderId::WestlawSim => "westlaw_sim",
            ProviderId::Canlii => "canlii",
            ProviderId::JusticeLaws => "justice_laws",
            ProviderId::Scc => "scc",
        }
    }

    /// Position in the source pyramid: 1 comprehensive, 2 regional,
    /// 3 statutory, 4 specialized. Lower is more authoritative.
    pub fn tier(self) -> u8 {
        match self {
            ProviderId::LexisnexisSim | ProviderId::WestlawSim => 1,
            ProviderId::Canlii => 2,
            ProviderId::JusticeLaws => 3,
            ProviderId::Scc => 4,
        }
    }

    pub fn dialect(self) -> Dialect {
        match self {
            ProviderId::LexisnexisSim | ProviderId::WestlawSim | ProviderId::Scc => {
                Dialect::SimBoolean
            }
            ProviderId::Canlii => Dialect::CanliiRest,
            ProviderId::JusticeLaws => Dialect::Statutory,
        }
    }

    /// Countries the provider holds material for; empty means any.
    pub fn coverage(self) -> &'static [&'static str] {
        match self {
            ProviderId::LexisnexisSim | ProviderId::WestlawSim => &[],
            ProviderId::Canlii | ProviderId::JusticeLaws | ProviderId::Scc => &["CA"],
        }
    }
}

impl fmt::Display for ProviderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProviderId {
    type Err = ResearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProviderId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ResearchError::InvalidRoutingTable(format!("unknown provider `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    /// Boolean keyword syntax shared by the commercial simulators.
    SimBoolean,
    /// CanLII-style REST query parameters.
    CanliiRest,
    /// Full-text parameter set for statute repositories.
    Statutory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub provider_id: ProviderId,
    pub tier: u8,
    pub dialect: Dialect,
    #[serde(with = "duration_ms")]
    pub timeout: Duration,
}

impl ProviderDescriptor {
    pub fn new(provider_id: ProviderId, timeout: Duration) -> Self {
        Self {
            provider_id,
            tier: provider_id.tier(),
            dialect: provider_id.dialect(),
            timeout,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

/// Provider-agnostic research query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericQuery {
    pub terms: Vec<String>,
    pub jurisdiction: Jurisdiction,
    pub issue_category: IssueCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_range: Option<DateRange>,
    #[serde(default = "default_max_results")]
    pub max_results_per_provider: usize,
}

fn default_max_results() -> usize {
    DEFAULT_MAX_RESULTS
}

impl GenericQuery {
    pub fn new(
        terms: impl IntoIterator<Item = impl Into<String>>,
        jurisdiction: Jurisdiction,
        issue_category: IssueCategory,
    ) -> Self {
        Self {
            terms: terms.into_iter().map(Into::into).collect(),
            jurisdiction,
            issue_category,
            date_range: None,
            max_results_per_provider: DEFAULT_MAX_RESULTS,
        }
    }

    pub fn validate(&self) -> Result<(), ResearchError> {
        if self.terms.iter().all(|t| t.trim().is_empty()) {
            return Err(ResearchError::InvalidQuery("terms must be non-empty".into()));
        }
        if let Some(r) = self.date_range {
            if r.from > r.to {
                return Err(ResearchError::InvalidQuery("date range is inverted".into()));
            }
        }
        Ok(())
    }
}

/// A query serialized into one provider's dialect.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProviderQuery {
    pub dialect: Dialect,
    pub text: String,
    pub max_results: usize,
}

/// One hit as returned by a provider, before consolidation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResult {
    pub provider_id: ProviderId,
    pub doc_id: String,
    pub title: String,
    pub citation_string: String,
    #[serde(default)]
    pub court: Option<String>,
    #[serde(default)]
    pub jurisdiction: Option<String>,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub headnote: Option<String>,
    #[serde(default)]
    pub score_provider: Option<f64>,
    #[serde(default)]
    pub url: Option<String>,
}

pub(crate) mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}
