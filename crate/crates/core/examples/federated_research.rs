//! Builds a routed query plan and fans it out to the simulated providers,
//! one of which is made to time out. The slow provider is reported as a
//! failure while the others still contribute.
//!
//! ```text
//! cargo run -p lices --example federated_research
//! ```

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use lices::domain::{parse_jurisdiction, IssueCategory};
use lices::providers::{default_latency, load_corpus, FailureMode, SimBehavior, SimFleet};
use lices::research::{build_query_plan, execute_plan, GenericQuery, ProviderId, RoutingTable};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Arc::new(load_corpus(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.jsonl"))?);
    let fleet = SimFleet::new(corpus, |id| {
        let b = SimBehavior::with_latency(default_latency(id) / 4);
        if id == ProviderId::WestlawSim {
            b.failing(FailureMode::Timeout)
        } else {
            b
        }
    });
    let routing = RoutingTable::default().with_default_timeout(Duration::from_millis(150));

    for (jur, cat) in [("CA-ON", IssueCategory::CaseLaw), ("CA", IssueCategory::Statute), ("US-NY", IssueCategory::CaseLaw)] {
        let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction(jur)?, cat);
        let plan = build_query_plan(&q, &routing)?;
        println!("{jur} {cat:?}: {}", plan.rationale);
        for call in &plan.calls {
            println!("  {:<15} {:?} {}", call.provider.provider_id.as_str(), call.query.dialect, call.query.text);
        }
    }

    let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction("CA-ON")?, IssueCategory::CaseLaw);
    let plan = build_query_plan(&q, &routing)?;
    let out = execute_plan(&plan, &fleet.registry()).await?;
    println!("\nfan-out finished in {:?}", out.wall_time);
    for run in &out.runs {
        println!(
            "  {:<15} {:>3} results {:>8.1?} {}",
            run.provider_id.as_str(),
            run.result_count,
            run.elapsed,
            run.failure.map(|f| format!("{f:?}")).unwrap_or_default()
        );
    }
    Ok(())
}
