mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use lices::bench::{load_queries, run_bench, BenchOptions};
use lices::consolidation::deduplicate;
use lices::providers::load_corpus;
use lices::research::ProviderId;

use common::*;

fn oracle() -> (usize, BTreeSet<BTreeSet<String>>) {
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixtures().join("dedup_oracle.json")).unwrap()).unwrap();
    let groups = v["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect())
        .collect();
    (v["unique"].as_u64().unwrap() as usize, groups)
}

#[test]
fn whole_corpus_groups_match_the_oracle() {
    let index = load_corpus(fixtures().join("corpus.jsonl")).unwrap();
    let raw: Vec<_> = index.entries().iter().map(|e| e.to_raw(1.0)).collect();
    assert_eq!(raw.len(), 500);
    let authorities = deduplicate(&raw);
    let got: BTreeSet<BTreeSet<String>> = authorities
        .iter()
        .map(|a| {
            a.provenance
                .iter()
                .map(|p| format!("{}/{}", p.provider_id.as_str(), p.doc_id))
                .collect()
        })
        .collect();
    let (unique, want) = oracle();
    assert_eq!(authorities.len(), unique);
    let missing: Vec<_> = want.difference(&got).take(5).collect();
    let extra: Vec<_> = got.difference(&want).take(5).collect();
    assert!(missing.is_empty() && extra.is_empty(), "missing {missing:?} extra {extra:?}");
}

#[tokio::test]
async fn bench_dedup_ratio_lands_in_band() {
    let index = Arc::new(load_corpus(fixtures().join("corpus.jsonl")).unwrap());
    let queries = load_queries(&fixtures().join("bench_queries.jsonl")).unwrap();
    let opts = BenchOptions {
        latency_scale: 0.0,
        ..Default::default()
    };
    let r = run_bench(index, &queries, &opts).await.unwrap();
    assert_eq!(r.combined.raw_total, 500);
    assert_eq!(r.combined.unique_count, 425);
    assert!((0.10..=0.20).contains(&r.dedup_ratio), "{}", r.dedup_ratio);
    assert!((r.dedup_ratio - 0.15).abs() < 1e-12);
    let sum: usize = r.per_provider.iter().map(|p| p.raw_count).sum();
    assert_eq!(sum, r.combined.raw_total);
    for p in &r.per_provider {
        assert_eq!(p.failures, 0);
        assert!(p.unique_count <= p.raw_count);
        assert!((0.0..=1.0).contains(&p.relevance_avg));
    }
}

#[tokio::test]
async fn a_single_provider_has_nothing_to_merge() {
    let index = Arc::new(load_corpus(fixtures().join("corpus.jsonl")).unwrap());
    let queries = load_queries(&fixtures().join("bench_queries.jsonl")).unwrap();
    for id in ProviderId::ALL {
        let opts = BenchOptions {
            latency_scale: 0.0,
            only: Some(vec![id]),
            ..Default::default()
        };
        let r = run_bench(index.clone(), &queries, &opts).await.unwrap();
        assert_eq!(r.combined.unique_count, r.combined.raw_total, "{id:?}");
        assert_eq!(r.combined.raw_total, index.provider_entries(id).count(), "{id:?}");
    }
}
