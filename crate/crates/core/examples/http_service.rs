//! Serves the JSON API on a local port and walks one matter through it
//! with an HTTP client, the way a browser front end would.
//!
//! ```text
//! cargo run -p lices --example http_service
//! ```

use std::path::PathBuf;

use serde_json::{json, Value};

use lices::config::LicesConfig;
use lices::orchestrator::{http, Runtime};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut cfg = LicesConfig::load(root.join("lices.toml"))?;
    cfg.data_dir = Some(std::env::temp_dir().join("lices-http-example"));
    let rt = Runtime::from_config(&cfg)?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let app = http::router(rt.orchestrator.clone());
    tokio::spawn(async move { axum::serve(listener, app).await });
    println!("serving on {base}");

    let c = reqwest::Client::new();
    let scenario: Value = serde_json::from_slice(&std::fs::read(root.join("scenarios/clean/scenario.json"))?)?;
    let created: Value = c
        .post(format!("{base}/matters"))
        .json(&json!({
            "client": scenario["client"],
            "summary": scenario["summary"],
            "issue_categories": scenario["issue_categories"],
            "research_terms": scenario["research_terms"],
        }))
        .send()
        .await?
        .json()
        .await?;
    let id = created["matter_id"].as_str().unwrap();
    let token = created["session_token"].as_str().unwrap();
    let url = |path: &str| format!("{base}/matters/{id}{path}");
    println!("POST /matters -> {id}");

    let show = |label: &str, v: &Value| println!("{label:<34} {}", v["status"].as_str().or(v["code"].as_str()).unwrap_or("?"));
    let v: Value = c.post(url("/conflict-check?stage=preliminary")).bearer_auth(token).send().await?.json().await?;
    show("POST conflict-check preliminary", &v);
    let lease = std::fs::read_to_string(root.join("scenarios/clean/documents/lease_agreement.txt"))?;
    let v: Value = c
        .post(url("/documents"))
        .bearer_auth(token)
        .json(&json!({"documents": [{"filename": "lease_agreement.txt", "content": lease}]}))
        .send()
        .await?
        .json()
        .await?;
    show("POST documents", &v);

    let mut answers = scenario["answers"].as_array().unwrap().iter();
    loop {
        let q: Value = c.get(url("/interview/next")).bearer_auth(token).send().await?.json().await?;
        if q["next"]["kind"] != "question" {
            show("GET interview/next", &q);
            break;
        }
        println!("  Q {}", q["next"]["text"].as_str().unwrap());
        match answers.next() {
            Some(answer) => {
                c.post(url("/interview/answer"))
                    .bearer_auth(token)
                    .json(&json!({"question_id": q["next"]["question_id"], "answer": answer}))
                    .send()
                    .await?;
            }
            None => {
                c.post(url("/interview/finish")).bearer_auth(token).send().await?;
                break;
            }
        }
    }
    for (label, path) in [
        ("POST conflict-check comprehensive", "/conflict-check?stage=comprehensive"),
        ("POST research", "/research"),
        ("POST analysis", "/analysis"),
    ] {
        let v: Value = c.post(url(path)).bearer_auth(token).send().await?.json().await?;
        show(label, &v);
    }
    let md = c.get(url("/report?format=markdown")).bearer_auth(token).send().await?.text().await?;
    println!("\n{}", md.lines().take(12).collect::<Vec<_>>().join("\n"));

    // Without the bearer token the API refuses.
    let v: Value = c.get(url("")).send().await?.json().await?;
    println!("\nGET /matters/{id} without token -> {v}");
    Ok(())
}
