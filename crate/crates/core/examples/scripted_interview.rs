//! Runs the interview loop against the deterministic stub adapter. The
//! script repeats its first question in different words and the loop
//! skips it. The stub picks its step from the number of answers so far, so
//! after the skip it lags one question behind and the session ends once
//! it has nothing but repeats to offer.
//!
//! ```text
//! cargo run -p lices --example scripted_interview
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use lices::conflict::CheckStage;
use lices::domain::{parse_jurisdiction, Party, PartyRole};
use lices::interview::{transcript, NextQuestion};
use lices::llm::{ScriptQuestion, ScriptedStub, StubScript};
use lices::orchestrator::{NewClient, NewMatter, Orchestrator};
use lices::research::ConnectorRegistry;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios/clean/stub_script.json");
    let mut script = StubScript::load(&path)?;
    // A reworded copy of the first question, ahead of a fresh one.
    script.steps[1].questions.insert(
        0,
        ScriptQuestion::Text("WHEN did your tenancy begin, and is the lease for a fixed term or month-to-month?".into()),
    );

    let orch = Orchestrator::builder(Arc::new(ScriptedStub::new(script)), ConnectorRegistry::new())
        .max_rounds(5)
        .build();
    let m = orch.create_matter(NewMatter {
        client_id: None,
        client: Some(NewClient {
            parties: vec![Party::new("Jane Doe", PartyRole::Client)],
            jurisdiction: parse_jurisdiction("CA-ON")?,
            contact: String::new(),
        }),
        summary: "Tenant whose landlord will not repair the heating.".into(),
        issue_categories: vec![],
        research_terms: vec![],
    })?;
    let (id, tok) = (&m.matter_id, &m.session_token);
    orch.conflict_check(tok, id, CheckStage::Preliminary).await?;
    orch.upload_documents(tok, id, vec![]).await?;

    let mut n = 0;
    loop {
        let step = orch.next_question(tok, id).await?;
        match step.next {
            NextQuestion::Question(q) => {
                n += 1;
                println!("{}: {}", q.question_id, q.text);
                orch.answer(tok, id, &q.question_id, &format!("answer {n}")).await?;
            }
            NextQuestion::Done { reason } => {
                println!("done: {reason:?} after {n} questions");
                break;
            }
        }
    }
    let rec = orch.record(tok, id).await?;
    print!("\n{}", transcript(rec.interview.as_ref().unwrap()));
    Ok(())
}
