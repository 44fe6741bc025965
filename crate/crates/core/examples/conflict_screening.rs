//! Screens a prospective client against a conflict database, first with
//! the intake parties and then with a name found later in a document.
//!
//! ```text
//! cargo run -p lices --example conflict_screening
//! ```

use std::path::PathBuf;

use lices::conflict::{name_similarity, normalize_party_name, ConflictChecker, ConflictStore};
use lices::domain::{parse_jurisdiction, ClientProfile, Party, PartyRole};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let db = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios/late_conflict/conflict_db.jsonl");
    let store = ConflictStore::open(&db)?;
    let checker = ConflictChecker::new(0.85)?;
    println!("{} records in {}", store.len(), db.display());

    let profile = ClientProfile {
        client_id: "c-000001".into(),
        parties: vec![
            Party::new("Jane Doe", PartyRole::Client),
            Party::new("Northgate Properties Ltd.", PartyRole::Opposing),
        ],
        jurisdiction: parse_jurisdiction("CA-ON")?,
        contact: String::new(),
    };
    let pre = checker.preliminary_check(&profile, &store)?;
    println!("preliminary: {:?} ({} hits)", pre.verdict, pre.hits.len());

    // A signatory on the demand letter turns up at the comprehensive stage.
    let mut everyone = profile.parties.clone();
    everyone.push(Party::new("Priya Raman", PartyRole::Related));
    let comp = checker.comprehensive_check(&everyone, &store)?;
    println!("comprehensive: {:?}", comp.verdict);
    for hit in &comp.hits {
        println!(
            "  {} ~ {} [{}] similarity {:.3}",
            hit.query_party, hit.record.party_name, hit.record.record_id, hit.similarity
        );
    }

    println!("\nnear-match scores:");
    for (a, b) in [
        ("Jon Smith", "John Smith"),
        ("Northgate Properties Ltd.", "NORTHGATE PROPERTIES"),
        ("Smith, John", "John Smith"),
        ("Acme Holdings Inc.", "Acme Holding Corp"),
    ] {
        let (na, nb) = (normalize_party_name(a)?, normalize_party_name(b)?);
        println!("  {a:<28} {b:<24} {:.4}", name_similarity(&na, &nb));
    }
    Ok(())
}
