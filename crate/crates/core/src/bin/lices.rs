use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use lices::bench::{load_queries, render_table, run_bench, BenchOptions};
use lices::config::LicesConfig;
use lices::conflict::{ConflictChecker, ConflictStore};
use lices::domain::{ClientProfile, Jurisdiction, Party, PartyRole};
use lices::orchestrator::{http, Runtime};
use lices::providers::load_corpus;
use lices::research::{ProviderId, RoutingTable};
use lices::scenario;

#[derive(Parser)]
#[command(name = "lices", version, about = "Legal consultation pipeline")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Drive a scenario through the whole pipeline offline.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory; defaults to <scenario>/out.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coverage and timing benchmark over a corpus.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        latency_scale: f64,
        /// Comma-separated provider ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long)]
        routing: Option<PathBuf>,
    },
    /// Screen one name against a conflict database.
    ConflictCheck {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        party: String,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bind: Option<String>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("lices: {msg}");
    ExitCode::from(code)
}

fn parse_provider(s: &str) -> Option<ProviderId> {
    ProviderId::ALL.into_iter().find(|p| p.as_str() == s.trim())
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().cmd {
        Cmd::Run { config, scenario: dir, out } => {
            let out = out.unwrap_or_else(|| dir.join("out"));
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(1, format!("{}: {e}", out.display()));
            }
            match scenario::run(&config, &dir, &out).await {
                Ok(o) => {
                    println!("matter {} finished as {}", o.drive.matter_id, o.drive.status);
                    if o.drive.report.is_some() {
                        println!("report: {}", o.out_dir.join("report.json").display());
                    }
                    println!("audit: {}", o.out_dir.join("audit.jsonl").display());
                    ExitCode::from(o.exit_code() as u8)
                }
                Err(e) => fail(e.exit_code() as u8, e),
            }
        }
        Cmd::Bench {
            corpus,
            queries,
            out,
            latency_scale,
            only,
            routing,
        } => {
            let index = match load_corpus(&corpus) {
                Ok(i) => Arc::new(i),
                Err(e) => return fail(2, e),
            };
            let queries = match load_queries(&queries) {
                Ok(q) => q,
                Err(e) => return fail(2, e),
            };
            let mut opts = BenchOptions {
                latency_scale,
                ..Default::default()
            };
            if let Some(names) = only {
                let mut ids = Vec::new();
                for n in names {
                    match parse_provider(&n) {
                        Some(p) => ids.push(p),
                        None => return fail(1, format!("unknown provider `{n}`")),
                    }
                }
                opts.only = Some(ids);
            }
            if let Some(path) = routing {
                match RoutingTable::load(&path) {
                    Ok(t) => opts.routing = t,
                    Err(e) => return fail(1, e),
                }
            }
            let report = match run_bench(index, &queries, &opts).await {
                Ok(r) => r,
                Err(e) => return fail(1, e),
            };
            print!("{}", render_table(&report));
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            if let Err(e) = std::fs::write(&out, json + "\n") {
                return fail(1, format!("{}: {e}", out.display()));
            }
            ExitCode::SUCCESS
        }
        Cmd::ConflictCheck { db, party, threshold } => {
            // An absent file would screen against nothing and report clear.
            if !db.is_file() {
                return fail(1, format!("{}: no such conflict database", db.display()));
            }
            let store = match ConflictStore::open(&db) {
                Ok(s) => s,
                Err(e) => return fail(1, e),
            };
            let checker = match threshold.map(ConflictChecker::new).transpose() {
                Ok(c) => c.unwrap_or_default(),
                Err(e) => return fail(1, e),
            };
            let profile = ClientProfile {
                client_id: "cli".into(),
                parties: vec![Party::new(party, PartyRole::Client)],
                jurisdiction: "CA".parse::<Jurisdiction>().expect("supported"),
                contact: String::new(),
            };
            match checker.preliminary_check(&profile, &store) {
                Ok(outcome) => {
                    println!("{}", serde_json::to_string_pretty(&outcome).expect("serializes"));
                    if outcome.verdict.blocks() {
                        ExitCode::from(3)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => fail(1, e),
            }
        }
        Cmd::Serve { config, bind } => {
            let cfg = match LicesConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(1, e),
            };
            let rt = match Runtime::from_config(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(1, e),
            };
            let bind = bind.unwrap_or(cfg.server.bind.clone());
            match http::serve(rt.orchestrator, &bind).await {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(1, e),
            }
        }
    }
}
