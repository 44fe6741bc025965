//! The whole pipeline offline, as `lices run` does it: intake, both
//! conflict checks, documents, interview, research, analysis and report.
//!
//! ```text
//! cargo run -p lices --example end_to_end [clean|conflict|late_conflict]
//! ```

use std::path::PathBuf;

use lices::scenario::run;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "clean".into());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::temp_dir().join(format!("lices-{name}"));
    std::fs::create_dir_all(&out)?;

    let outcome = run(&root.join("lices.toml"), &root.join("scenarios").join(&name), &out).await?;
    let d = &outcome.drive;
    println!("{} ended {} after {} calls", d.matter_id, d.status, d.api_calls);
    println!("connector calls: {}", outcome.connector_calls);
    if let Some(r) = &d.report {
        println!("{} authorities, {} cited, {} unverified", r.authorities.len(), r.cited.len(), r.unverified_references.len());
        println!("written to {}", out.display());
    }
    for line in std::fs::read_to_string(out.join("audit.jsonl"))?.lines() {
        let v: serde_json::Value = serde_json::from_str(line)?;
        let to = v["transition"]["to"].as_str().unwrap_or("");
        println!("  #{:<2} {:<24} {}", v["seq"], v["event"].as_str().unwrap_or(""), to);
    }
    Ok(())
}
