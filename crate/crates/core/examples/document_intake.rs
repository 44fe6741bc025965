//! Ingests the fixture documents and shows what intake pulls out of them:
//! candidate parties for the comprehensive conflict check and key terms
//! for research.
//!
//! ```text
//! cargo run -p lices --example document_intake
//! ```

use std::path::PathBuf;

use chrono::Utc;
use lices::ingest::{extract_key_terms, extract_party_candidates, Ingestor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios/late_conflict/documents");
    let ingestor = Ingestor::default();
    let mut paths: Vec<_> = std::fs::read_dir(&dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for (n, path) in paths.iter().enumerate() {
        let name = path.file_name().unwrap().to_string_lossy();
        let doc = ingestor.ingest(&std::fs::read(path)?, &name, "m-000001", format!("d-{:06}", n + 1), Utc::now())?;
        println!("{} ({:?}, {} chars)", doc.filename, doc.declared_format, doc.text.len());
        let parties: Vec<_> = extract_party_candidates(&doc).into_iter().map(|p| p.raw_name).collect();
        println!("  parties: {}", parties.join(", "));
        println!("  terms:   {}", extract_key_terms(&doc, 6).join(", "));
    }

    // Formats are taken from the extension; unknown ones are refused.
    match ingestor.ingest(b"\x89PNG", "scan.png", "m-000001", "d-x".into(), Utc::now()) {
        Ok(_) => println!("scan.png accepted"),
        Err(e) => println!("scan.png refused: {e}"),
    }
    Ok(())
}
