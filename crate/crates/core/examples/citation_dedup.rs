//! Canonical citation keys, cross-provider deduplication and ranking over
//! the fixture corpus.
//!
//! ```text
//! cargo run -p lices --example citation_dedup
//! ```

use std::path::PathBuf;

use lices::consolidation::{canonical_citation_key, consolidate, deduplicate, RankingConfig};
use lices::domain::{parse_jurisdiction, IssueCategory};
use lices::providers::load_corpus;
use lices::research::GenericQuery;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (cite, title, year) in [
        ("2015 SCC 5", None, None),
        ("[1999] 2 S.C.R. 817", None, None),
        ("", Some("Smith v Jones"), Some(2010)),
    ] {
        println!("{cite:<22} -> {}", canonical_citation_key(cite, title, year)?);
    }

    let corpus = load_corpus(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.jsonl"))?;
    let raw: Vec<_> = corpus.entries().iter().map(|e| e.to_raw(1.0)).collect();
    let merged = deduplicate(&raw);
    println!("\n{} provider records -> {} authorities", raw.len(), merged.len());
    if let Some(a) = merged.iter().max_by_key(|a| a.provenance.len()) {
        println!("most widely held: {} ({})", a.title, a.canonical_key);
        for p in &a.provenance {
            println!("  {} {}", p.provider_id.as_str(), p.doc_id);
        }
    }

    let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction("CA-ON")?, IssueCategory::CaseLaw);
    let hits: Vec<_> = raw.iter().filter(|r| r.title.to_lowercase().contains("lease") || r.headnote.as_deref().unwrap_or("").contains("lease")).cloned().collect();
    let cons = consolidate(&hits, &q, &RankingConfig::default(), "2025-01-01T00:00:00Z".parse()?)?;
    println!("\ntop authorities for `lease breach` in Ontario:");
    for a in cons.authorities.iter().take(5) {
        println!("  {:.3}  {}  {}", a.relevance, a.citation, a.title);
    }
    Ok(())
}
