//! Coverage and timing benchmark over the fixture corpus with simulator
//! latencies scaled down, printed as a per-database table.
//!
//! ```text
//! cargo run -p lices --example coverage_bench [latency-scale]
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use lices::bench::{load_queries, render_table, run_bench, BenchOptions};
use lices::providers::load_corpus;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scale: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let corpus = Arc::new(load_corpus(root.join("corpus.jsonl"))?);
    let queries = load_queries(&root.join("bench_queries.jsonl"))?;
    let opts = BenchOptions {
        latency_scale: scale,
        ..Default::default()
    };
    let report = run_bench(corpus, &queries, &opts).await?;
    print!("{}", render_table(&report));
    Ok(())
}
