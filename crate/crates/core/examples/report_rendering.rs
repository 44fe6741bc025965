//! Assembles a report from a structured analysis and a ranked authority
//! list, then renders it. Hints that match no authority end up under
//! unverified references instead of being cited.
//!
//! ```text
//! cargo run -p lices --example report_rendering [json|markdown|html]
//! ```

use std::path::PathBuf;

use lices::consolidation::{consolidate, RankingConfig};
use lices::domain::{parse_jurisdiction, IssueCategory};
use lices::llm::StubScript;
use lices::providers::load_corpus;
use lices::report::{assemble_report, render_report_as};
use lices::research::GenericQuery;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let format = std::env::args().nth(1).unwrap_or_else(|| "markdown".into());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let analysis = StubScript::load(root.join("scenarios/clean/stub_script.json"))?.analysis;

    let corpus = load_corpus(root.join("corpus.jsonl"))?;
    let raw: Vec<_> = corpus.entries().iter().map(|e| e.to_raw(1.0)).collect();
    let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction("CA-ON")?, IssueCategory::CaseLaw);
    let now = "2025-01-01T12:00:00Z".parse()?;
    let mut cons = consolidate(&raw, &q, &RankingConfig::default(), now)?;
    cons.authorities.truncate(10);

    let report = assemble_report(
        &analysis,
        &cons.authorities,
        &[],
        "m-000001",
        Some("This report is general legal information. It is not legal advice; consult a qualified lawyer."),
        now,
    )?;
    eprintln!("{} cited, {} unverified", report.cited.len(), report.unverified_references.len());
    print!("{}", String::from_utf8(render_report_as(&report, &format)?)?);
    Ok(())
}
