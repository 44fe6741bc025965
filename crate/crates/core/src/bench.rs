//! Coverage benchmark: each query goes through plan, fan-out and
//! consolidation against simulated providers, and the counts and timings
//! are aggregated per provider and overall.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consolidation::{consolidate, RankingConfig};
use crate::domain::{IssueCategory, Jurisdiction};
use crate::providers::{default_latency, CorpusIndex, SimBehavior, SimFleet};
use crate::research::{
    build_query_plan, execute_plan, DateRange, GenericQuery, ProviderId, RoutingTable,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("queries file line {line}: {message}")]
    Query { line: usize, message: String },
    #[error("{0}")]
    Research(String),
}

/// One line of the queries file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchQuery {
    pub terms: Vec<String>,
    pub jurisdiction: Jurisdiction,
    pub issue_category: IssueCategory,
    #[serde(default)]
    pub date_range: Option<DateRange>,
}

pub fn parse_queries(text: &str) -> Result<Vec<BenchQuery>, BenchError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| BenchError::Query {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Multiplies every provider's default latency.
    pub latency_scale: f64,
    /// Restricts every plan to these providers.
    pub only: Option<Vec<ProviderId>>,
    pub routing: RoutingTable,
    pub ranking: RankingConfig,
    /// Large enough that nothing is truncated on the fixture corpus.
    pub max_results_per_provider: usize,
    /// Reference instant for recency scoring.
    pub now: DateTime<Utc>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            latency_scale: 1.0,
            only: None,
            routing: RoutingTable::default(),
            ranking: RankingConfig::default(),
            max_results_per_provider: 1000,
            now: "2025-01-01T00:00:00Z".parse().unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderStats {
    pub provider_id: ProviderId,
    pub queries: usize,
    pub raw_count: usize,
    /// Distinct authorities this provider contributed to.
    pub unique_count: usize,
    /// Mean relevance of those authorities.
    pub relevance_avg: f64,
    pub mean_latency_ms: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedStats {
    pub raw_total: usize,
    pub unique_count: usize,
    /// Sum of per-query fan-out wall times.
    pub wall_time_ms: f64,
    /// What the same calls would have taken one after another.
    pub serial_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub queries: usize,
    pub per_provider: Vec<ProviderStats>,
    pub combined: CombinedStats,
    /// 1 - unique_count / raw_total.
    pub dedup_ratio: f64,
}

#[derive(Default)]
struct Acc {
    queries: usize,
    raw: usize,
    unique: usize,
    relevance_sum: f64,
    elapsed: Duration,
    failures: usize,
}

pub async fn run_bench(
    corpus: Arc<CorpusIndex>,
    queries: &[BenchQuery],
    opts: &BenchOptions,
) -> Result<BenchReport, BenchError> {
    let scale = opts.latency_scale.max(0.0);
    let fleet = SimFleet::new(corpus, |id| {
        SimBehavior::with_latency(default_latency(id).mul_f64(scale))
    });
    let registry = fleet.registry();
    let mut acc: BTreeMap<ProviderId, Acc> = BTreeMap::new();
    let mut combined = CombinedStats {
        raw_total: 0,
        unique_count: 0,
        wall_time_ms: 0.0,
        serial_time_ms: 0.0,
    };
    for bq in queries {
        let mut q = GenericQuery::new(bq.terms.clone(), bq.jurisdiction.clone(), bq.issue_category);
        q.date_range = bq.date_range;
        q.max_results_per_provider = opts.max_results_per_provider;
        let mut plan = build_query_plan(&q, &opts.routing).map_err(|e| BenchError::Research(e.to_string()))?;
        if let Some(only) = &opts.only {
            plan = plan.restrict_to(only);
        }
        let outcome = execute_plan(&plan, &registry)
            .await
            .map_err(|e| BenchError::Research(e.to_string()))?;
        let cons = consolidate(&outcome.results, &q, &opts.ranking, opts.now)
            .map_err(|e| BenchError::Research(e.to_string()))?;

        combined.raw_total += outcome.results.len();
        combined.unique_count += cons.authorities.len();
        combined.wall_time_ms += outcome.wall_time.as_secs_f64() * 1e3;
        for run in &outcome.runs {
            let a = acc.entry(run.provider_id).or_default();
            a.queries += 1;
            a.raw += run.result_count;
            a.elapsed += run.elapsed;
            a.failures += usize::from(run.failure.is_some());
            combined.serial_time_ms += run.elapsed.as_secs_f64() * 1e3;
        }
        for auth in &cons.authorities {
            let mut providers: Vec<_> = auth.provenance.iter().map(|p| p.provider_id).collect();
            providers.dedup();
            for p in providers {
                let a = acc.entry(p).or_default();
                a.unique += 1;
                a.relevance_sum += auth.relevance;
            }
        }
    }
    let per_provider = acc
        .into_iter()
        .map(|(id, a)| ProviderStats {
            provider_id: id,
            queries: a.queries,
            raw_count: a.raw,
            unique_count: a.unique,
            relevance_avg: if a.unique == 0 { 0.0 } else { a.relevance_sum / a.unique as f64 },
            mean_latency_ms: if a.queries == 0 {
                0.0
            } else {
                a.elapsed.as_secs_f64() * 1e3 / a.queries as f64
            },
            failures: a.failures,
        })
        .collect();
    let dedup_ratio = if combined.raw_total == 0 {
        0.0
    } else {
        1.0 - combined.unique_count as f64 / combined.raw_total as f64
    };
    Ok(BenchReport {
        queries: queries.len(),
        per_provider,
        combined,
        dedup_ratio,
    })
}

pub fn load_queries(path: &Path) -> Result<Vec<BenchQuery>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Query {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_queries(&text)
}

/// Plain-text table with one row per provider and a combined row.
pub fn render_table(r: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>12} {:>10} {:>18} {:>20}",
        "Database", "Raw Results", "Relevance", "Unique Authorities", "Processing Time (s)"
    );
    for p in &r.per_provider {
        let _ = writeln!(
            out,
            "{:<16} {:>12} {:>10.3} {:>18} {:>20.3}",
            p.provider_id.as_str(),
            p.raw_count,
            p.relevance_avg,
            p.unique_count,
            p.mean_latency_ms / 1e3
        );
    }
    let _ = writeln!(
        out,
        "{:<16} {:>12} {:>10} {:>18} {:>20.3}",
        "Combined",
        r.combined.raw_total,
        "",
        r.combined.unique_count,
        r.combined.wall_time_ms / 1e3 / r.queries.max(1) as f64
    );
    let _ = writeln!(
        out,
        "queries: {}  dedup ratio: {:.3}  serial time (s): {:.3}  parallel time (s): {:.3}",
        r.queries,
        r.dedup_ratio,
        r.combined.serial_time_ms / 1e3,
        r.combined.wall_time_ms / 1e3
    );
    out
}
