//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, NaiveDate, Utc};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};

use lices::conflict::{
    name_similarity, normalize_party_name, CheckStage, ConflictChecker, ConflictRecord,
    ConflictStore, RecordSide,
};
use lices::consolidation::{
    deduplicate, relevance_score, score_parts, Authority, CitationKey, CitationKind, Provenance,
    RankingConfig,
};
use lices::domain::{
    parse_jurisdiction, ClientProfile, IssueCategory, Party, PartyRole, SessionStatus,
};
use lices::interview::{normalize_question, NextQuestion};
use lices::llm::{ScriptQuestion, ScriptStep, ScriptedStub, StubScript};
use lices::orchestrator::audit::{AuditEventKind, MemorySink};
use lices::orchestrator::{NewClient, NewMatter, Orchestrator, Upload};
use lices::providers::{load_corpus, CorpusIndex, SimBehavior, SimFleet};
use lices::report::{render_report, AnalysisReport, ReportFormat};
use lices::research::{build_query_plan, execute_plan, GenericQuery, ProviderId, RoutingTable};
use lices::scenario::{drive, ScenarioFile};

use common::*;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus() -> Arc<CorpusIndex> {
    Arc::new(load_corpus(fixtures().join("corpus.jsonl")).unwrap())
}

// 1. Parallel fan-out timing.
async fn ac1() -> Check {
    let fleet = SimFleet::new(corpus(), |id| {
        SimBehavior::with_latency(Duration::from_millis(match id {
            ProviderId::LexisnexisSim => 320,
            ProviderId::WestlawSim => 280,
            ProviderId::Canlii => 110,
            _ => 0,
        }))
    });
    let registry = fleet.registry();
    let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction("CA-ON").unwrap(), IssueCategory::CaseLaw);
    let plan = build_query_plan(&q, &RoutingTable::default())
        .map_err(|e| e.to_string())?
        .restrict_to(&[ProviderId::LexisnexisSim, ProviderId::WestlawSim, ProviderId::Canlii]);
    ensure(plan.calls.len() == 3, || format!("plan has {} calls", plan.calls.len()))?;
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for run in 0..20 {
        let out = execute_plan(&plan, &registry).await.map_err(|e| e.to_string())?;
        let w = out.wall_time.as_secs_f64();
        lo = lo.min(w);
        hi = hi.max(w);
        ensure(w > 0.32 && w < 0.47, || format!("run {run}: wall time {w:.4} s"))?;
        ensure(out.runs.iter().all(|r| r.failure.is_none()), || format!("run {run}: a provider failed"))?;
    }
    Ok(format!("20 runs, wall time {lo:.3}..{hi:.3} s"))
}

// 2. Dedup against the pairwise oracle.
fn ac2() -> Check {
    let started = Instant::now();
    let index = corpus();
    let raw: Vec<_> = index.entries().iter().map(|e| e.to_raw(1.0)).collect();
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
    let oracle: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixtures().join("dedup_oracle.json")).unwrap()).unwrap();
    let want: BTreeSet<BTreeSet<String>> = oracle["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect())
        .collect();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixtures().join("corpus_manifest.json")).unwrap()).unwrap();
    let planted = manifest["unique_authorities"].as_u64().unwrap() as usize;
    let mismatches = want.symmetric_difference(&got).count();
    ensure(mismatches == 0, || format!("{mismatches} group mismatches"))?;
    ensure(authorities.len() == planted, || format!("{} unique, planted {planted}", authorities.len()))?;
    let keys: BTreeSet<_> = authorities.iter().map(|a| &a.canonical_key).collect();
    ensure(keys.len() == authorities.len(), || "duplicate canonical key".into())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{} raw -> {} unique, 0 mismatches", raw.len(), authorities.len()))
}

const FIRST: &[&str] = &[
    "Amelia", "Bruno", "Chidi", "Dana", "Elif", "Farah", "Gustavo", "Hana", "Ivan", "Jun", "Kofi",
    "Leila", "Mateo", "Noor", "Oskar", "Paloma", "Quentin", "Rosa", "Sven", "Tariq",
];
const LAST: &[&str] = &[
    "Abernathy", "Bellweather", "Castellano", "Drummond", "Eriksen", "Fairbanks", "Galloway",
    "Hargreave", "Ishikawa", "Jablonski", "Kowalczyk", "Lindqvist", "Montgomery", "Nakashima",
    "Okonkwo", "Pemberton", "Quintero", "Rasmussen", "Szymanski", "Thackeray",
];
const COMPANY: &[&str] = &[
    "Aurora Holdings Inc.", "Bluewater Logistics Ltd.", "Cedar Ridge Developments Corp.",
    "Dunmore Capital LLP", "Evergreen Realty Ltd.", "Foxglove Media Inc.",
    "Granite Peak Construction Ltd.", "Harbourfront Leasing Corp.",
];
// Disjoint from the pools above; fills the rest of each database.
const DB_FILLER: &[&str] = &[
    "Zygmunt Wojciechowski", "Xiomara Villalobos", "Yevgenia Ustinova", "Wilhelmina Trautmann",
    "Ulrich Sondergaard", "Vittoria Renzulli", "Quayside Fisheries Co.", "Tamarack Mining Corp.",
    "Sablewood Timber Ltd.", "Ravensworth Trust Company",
];

fn person(rng: &mut StdRng) -> String {
    format!("{} {}", FIRST.choose(rng).unwrap(), LAST.choose(rng).unwrap())
}

#[derive(Clone, Copy, Debug)]
enum Plant {
    None,
    Profile,
    Document,
    Answer,
}

// 3. Conflict protocol safety over seeded random scenarios.
async fn ac3() -> Check {
    let index = corpus();
    let script = scenario("clean").stub_script.unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let (mut planted, mut caught, mut prelim, mut clean_reports) = (0, 0, 0, 0);
    for i in 0..200 {
        let client = person(&mut rng);
        let mut opposing = COMPANY.choose(&mut rng).unwrap().to_string();
        let mut adverse = person(&mut rng);
        while adverse == client {
            adverse = person(&mut rng);
        }
        let plant = match i % 4 {
            0 => Plant::None,
            1 => Plant::Profile,
            2 => Plant::Document,
            _ => Plant::Answer,
        };
        if let Plant::Profile = plant {
            opposing = adverse.clone();
        }

        let mut records = Vec::new();
        for (n, name) in DB_FILLER.choose_multiple(&mut rng, 6).enumerate() {
            let side = *[RecordSide::OurClient, RecordSide::Adverse, RecordSide::Related]
                .choose(&mut rng)
                .unwrap();
            records.push(ConflictRecord::new(format!("F-{n}"), "m-old", *name, side).unwrap());
        }
        if !matches!(plant, Plant::None) {
            planted += 1;
            // Same name after normalization, written differently.
            let stored = if rng.gen_bool(0.5) { adverse.to_uppercase() } else { format!("  {adverse}. ") };
            records.push(ConflictRecord::new("P-1", "m-old", stored, RecordSide::Adverse).unwrap());
        }
        records.shuffle(&mut rng);

        let mut doc = format!("Re: {client} v. {opposing}\n\nThe lease was breached.\n");
        if let Plant::Document = plant {
            doc.push_str(&format!("\nSigned: {adverse}\n"));
        }
        let mut answers: Vec<String> = (1..=6).map(|n| format!("Answer number {n}.")).collect();
        if let Plant::Answer = plant {
            answers[2] = format!("The building manager wrote to me.\nSigned: {adverse}");
        }
        let file = ScenarioFile {
            client: NewClient {
                parties: vec![
                    Party::new(client.clone(), PartyRole::Client),
                    Party::new(opposing.clone(), PartyRole::Opposing),
                ],
                jurisdiction: parse_jurisdiction("CA-ON").unwrap(),
                contact: String::new(),
            },
            summary: "Tenant dispute over repairs and a termination notice.".into(),
            issue_categories: vec![IssueCategory::CaseLaw],
            research_terms: vec!["lease".into(), "breach".into()],
            answers,
        };
        let docs = vec![Upload {
            filename: "letter.txt".into(),
            bytes: doc.into_bytes(),
        }];

        let fleet = SimFleet::instant(index.clone());
        let sink = Arc::new(MemorySink::default());
        let orch = Orchestrator::builder(Arc::new(ScriptedStub::new(script.clone())), fleet.registry())
            .conflicts(Arc::new(ConflictStore::in_memory(records).unwrap()))
            .checker(ConflictChecker::new(0.85).unwrap())
            .audit_sink(sink.clone())
            .build();
        let out = drive(&orch, &file, &docs).await.map_err(|e| format!("scenario {i}: {e}"))?;
        let events = parse_events(&sink);
        let terminated = events.iter().any(|e| e.event == AuditEventKind::ConflictTerminated);
        match plant {
            Plant::None => {
                if out.status == SessionStatus::ReportReady {
                    clean_reports += 1;
                }
            }
            _ => {
                ensure(out.status == SessionStatus::TerminatedConflict, || {
                    format!("scenario {i} ({plant:?}, {adverse}): ended {:?}", out.status)
                })?;
                ensure(fleet.total_calls() == 0, || {
                    format!("scenario {i}: {} connector calls", fleet.total_calls())
                })?;
                ensure(terminated, || format!("scenario {i}: no ConflictTerminated event"))?;
                ensure(!events.iter().any(|e| e.event == AuditEventKind::ResearchDispatched), || {
                    format!("scenario {i}: research dispatched")
                })?;
                caught += 1;
                if events.iter().any(|e| e.event == AuditEventKind::ConflictTerminated && e.detail["stage"] == "preliminary") {
                    prelim += 1;
                }
            }
        }
    }
    ensure(caught == planted, || format!("recall {caught}/{planted}"))?;
    Ok(format!(
        "200 scenarios, recall {caught}/{planted} ({prelim} preliminary), {clean_reports}/{} unplanted reached a report",
        200 - planted
    ))
}

fn variant(rng: &mut StdRng, name: &str) -> String {
    let mut chars: Vec<char> = name.chars().collect();
    match rng.gen_range(0..4) {
        0 => name.to_uppercase(),
        1 => {
            // One letter dropped.
            let i = rng.gen_range(1..chars.len());
            if chars[i].is_alphabetic() {
                chars.remove(i);
            }
            chars.into_iter().collect()
        }
        2 => {
            let parts: Vec<&str> = name.split_whitespace().rev().collect();
            parts.join(" ")
        }
        _ => name.to_string(),
    }
}

// 4. Monotonicity of the verdict over party supersets.
fn ac4() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let jur = parse_jurisdiction("CA").unwrap();
    let mut seen = [0usize; 3];
    for i in 0..100 {
        let checker = ConflictChecker::new(rng.gen_range(0.6..=1.0)).unwrap();
        // Parties and records share a small pool so hits are common.
        let pool: Vec<String> = (0..8)
            .map(|_| {
                if rng.gen_bool(0.75) {
                    person(&mut rng)
                } else {
                    COMPANY.choose(&mut rng).unwrap().to_string()
                }
            })
            .collect();
        let mut records = Vec::new();
        for n in 0..rng.gen_range(0..6) {
            let base = pool.choose(&mut rng).unwrap().clone();
            let name = variant(&mut rng, &base);
            if normalize_party_name(&name).is_err() {
                continue;
            }
            records.push(ConflictRecord::new(format!("R-{n}"), "m", name, RecordSide::Adverse).unwrap());
        }
        let store = ConflictStore::in_memory(records).unwrap();
        let base: Vec<Party> = (0..rng.gen_range(1..3))
            .map(|_| Party::new(pool.choose(&mut rng).unwrap().clone(), PartyRole::Client))
            .collect();
        let mut superset = base.clone();
        for _ in 0..rng.gen_range(0..4) {
            superset.push(Party::new(pool.choose(&mut rng).unwrap().clone(), PartyRole::Related));
        }
        superset.shuffle(&mut rng);
        let profile = ClientProfile {
            client_id: "c".into(),
            parties: base,
            jurisdiction: jur.clone(),
            contact: String::new(),
        };
        let pre = checker.preliminary_check(&profile, &store).map_err(|e| e.to_string())?;
        let comp = checker.comprehensive_check(&superset, &store).map_err(|e| e.to_string())?;
        ensure(comp.verdict >= pre.verdict, || {
            format!("pair {i}: preliminary {:?} but comprehensive {:?}", pre.verdict, comp.verdict)
        })?;
        seen[comp.verdict as usize] += 1;
    }
    Ok(format!(
        "100 pairs, 0 violations (comprehensive clear/potential/conflict = {}/{}/{})",
        seen[0], seen[1], seen[2]
    ))
}

const TOPICS: &[&str] = &[
    "When did the tenancy begin?",
    "Did you give the landlord written notice of the repairs?",
    "How much rent do you pay each month?",
    "Has anyone else lived in the unit with you?",
    "What did the termination notice say?",
    "Were there witnesses to the water damage?",
    "Do you have photographs of the ceiling leak?",
    "What outcome would you consider fair?",
    "Has the property manager replied in writing?",
    "Did you withhold any rent payments?",
    "Is there a security deposit on file?",
    "Which utilities are included in the lease?",
];

fn adversarial(rng: &mut StdRng, q: &str) -> String {
    match rng.gen_range(0..5) {
        0 => q.to_string(),
        1 => q.to_uppercase(),
        4 => q.replacen(' ', "-", 2),
        2 => q.replace('?', "").replace(' ', "  ") + " ?",
        _ => {
            // Same words, last two swapped.
            let mut w: Vec<&str> = q.split_whitespace().collect();
            let n = w.len();
            w.swap(n - 1, n - 2);
            w.join(" ")
        }
    }
}

// 5. Interview anti-repetition and termination.
async fn ac5() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let analysis = scenario("clean").stub_script.unwrap().analysis;
    let (mut adversarial_sessions, mut suppressed) = (0, 0);
    for i in 0..100 {
        let hostile = i % 2 == 1;
        adversarial_sessions += usize::from(hostile);
        let mut asked: Vec<String> = Vec::new();
        let mut steps = Vec::new();
        for _ in 0..rng.gen_range(1..8) {
            let mut qs = Vec::new();
            for _ in 0..rng.gen_range(1..=5) {
                let text = if hostile && !asked.is_empty() && rng.gen_bool(0.6) {
                    let seen = asked[rng.gen_range(0..asked.len())].clone();
                    adversarial(&mut rng, &seen)
                } else {
                    TOPICS.choose(&mut rng).unwrap().to_string()
                };
                asked.push(text.clone());
                qs.push(ScriptQuestion::Text(text));
            }
            steps.push(ScriptStep { questions: qs });
        }
        let script = StubScript {
            fixture: format!("session-{i}"),
            steps,
            analysis: analysis.clone(),
        };
        let max_rounds = rng.gen_range(1..=12);
        let orch = Orchestrator::builder(Arc::new(ScriptedStub::new(script)), Default::default())
            .max_rounds(max_rounds)
            .build();
        let m = orch
            .create_matter(NewMatter {
                client_id: None,
                client: Some(NewClient {
                    parties: vec![Party::new("Sam Client", PartyRole::Client)],
                    jurisdiction: parse_jurisdiction("CA-ON").unwrap(),
                    contact: String::new(),
                }),
                summary: "Repairs dispute.".into(),
                issue_categories: vec![IssueCategory::CaseLaw],
                research_terms: vec![],
            })
            .map_err(|e| e.to_string())?;
        let (id, tok) = (&m.matter_id, &m.session_token);
        orch.conflict_check(tok, id, CheckStage::Preliminary).await.map_err(|e| e.to_string())?;
        orch.upload_documents(tok, id, vec![]).await.map_err(|e| e.to_string())?;
        let mut calls = 0;
        loop {
            calls += 1;
            ensure(calls <= max_rounds as usize + 2, || format!("session {i}: interview did not terminate"))?;
            let step = orch.next_question(tok, id).await.map_err(|e| e.to_string())?;
            let NextQuestion::Question(q) = step.next else { break };
            orch.answer(tok, id, &q.question_id, "ok").await.map_err(|e| e.to_string())?;
        }
        let status = orch.view(tok, id).await.map_err(|e| e.to_string())?.status;
        ensure(status == SessionStatus::InterviewComplete, || format!("session {i}: {status:?}"))?;
        let rec = orch.record(tok, id).await.map_err(|e| e.to_string())?;
        let state = rec.interview.unwrap();
        ensure(state.qa_history.len() <= max_rounds as usize, || {
            format!("session {i}: {} rounds > {max_rounds}", state.qa_history.len())
        })?;
        let texts: Vec<String> = state.qa_history.iter().map(|e| normalize_question(&e.question)).collect();
        for a in 0..texts.len() {
            for b in a + 1..texts.len() {
                let s = name_similarity(&texts[a], &texts[b]);
                ensure(s < 0.9, || format!("session {i}: {:?} ~ {:?} = {s:.3}", texts[a], texts[b]))?;
            }
        }
        let distinct: BTreeSet<_> = asked.iter().map(|t| normalize_question(t)).collect();
        suppressed += asked.len().saturating_sub(distinct.len());
    }
    Ok(format!(
        "100 sessions ({adversarial_sessions} adversarial, {suppressed} scripted repeats), no similar pair, all within max_rounds"
    ))
}

fn plan_hash(q: &GenericQuery, table: &RoutingTable) -> Result<String, String> {
    let plan = build_query_plan(q, table).map_err(|e| e.to_string())?;
    let json = serde_json::to_vec(&plan).map_err(|e| e.to_string())?;
    Ok(hex::encode(Sha256::digest(json)))
}

// 6. Routing table conformance.
fn ac6() -> Check {
    let table = RoutingTable::default();
    let cats = [IssueCategory::CaseLaw, IssueCategory::Statute, IssueCategory::Procedure, IssueCategory::Mixed];
    let mut rows = 0;
    for code in ["CA", "CA-ON", "CA-BC", "CA-QC"] {
        let q = GenericQuery::new(["lease"], parse_jurisdiction(code).unwrap(), IssueCategory::CaseLaw);
        let plan = build_query_plan(&q, &table).map_err(|e| e.to_string())?;
        ensure(plan.providers().first() == Some(&ProviderId::Canlii), || {
            format!("{code}/case_law plan starts with {:?}", plan.providers().first())
        })?;
        rows += 1;
    }
    for code in ["US", "US-NY", "US-CA", "US-TX"] {
        for cat in cats {
            let q = GenericQuery::new(["contract"], parse_jurisdiction(code).unwrap(), cat);
            let plan = build_query_plan(&q, &table).map_err(|e| e.to_string())?;
            for p in plan.providers() {
                ensure(!p.coverage().contains(&"CA"), || format!("{code}/{cat:?} plan includes {p}"))?;
            }
            ensure(!plan.calls.is_empty(), || format!("{code}/{cat:?} plan is empty"))?;
            rows += 1;
        }
    }
    for code in ["CA-ON", "US-NY"] {
        for cat in cats {
            let q = GenericQuery::new(["lease", "breach"], parse_jurisdiction(code).unwrap(), cat);
            let first = plan_hash(&q, &table)?;
            for _ in 0..9 {
                let again = plan_hash(&q, &RoutingTable::default())?;
                ensure(again == first, || format!("{code}/{cat:?} plan hash changed"))?;
            }
        }
    }
    Ok(format!("{rows} routing rows, 8 plans hash-stable over 10 builds"))
}

fn authority(title: &str, headnote: &str, court: Option<&str>, jur: Option<&str>, date: Option<NaiveDate>) -> Authority {
    Authority {
        authority_id: "a".into(),
        canonical_key: CitationKey {
            kind: CitationKind::Metadata,
            key: "k".into(),
        },
        citation: String::new(),
        title: title.into(),
        court: court.map(str::to_string),
        jurisdiction: jur.map(str::to_string),
        date,
        headnote: Some(headnote.into()),
        provenance: vec![Provenance {
            provider_id: ProviderId::Canlii,
            doc_id: "d".into(),
            url: None,
        }],
        relevance: 0.0,
    }
}

// 7. Relevance score properties.
fn ac7() -> Check {
    let cfg = RankingConfig::default();
    let now: DateTime<Utc> = "2024-12-31T12:00:00Z".parse().unwrap();
    let on = parse_jurisdiction("CA-ON").unwrap();
    let q = GenericQuery::new(["lease", "breach", "repair"], on.clone(), IssueCategory::CaseLaw);

    let top = authority(
        "Lease breach",
        "repair obligations",
        Some("SCC"),
        Some("CA-ON"),
        NaiveDate::from_ymd_opt(2015, 1, 1),
    );
    let s = relevance_score(&top, &q, &cfg, now).map_err(|e| e.to_string())?;
    ensure((s - 0.98).abs() < 1e-9, || format!("expected 0.98, got {s}"))?;
    let low = authority("Unrelated", "nothing here", Some("XYZ"), Some("US-NY"), NaiveDate::from_ymd_opt(1960, 1, 1));
    let s2 = relevance_score(&low, &q, &cfg, now).map_err(|e| e.to_string())?;
    ensure((s2 - 0.06).abs() < 1e-9, || format!("expected 0.06, got {s2}"))?;

    const VOCAB: &[&str] = &[
        "lease", "breach", "repair", "tenant", "landlord", "notice", "damages", "contract",
        "negligence", "duty", "appeal", "statute", "employment", "dismissal", "privacy",
    ];
    const COURTS: &[&str] = &["SCC", "ONCA", "ONSC", "BCCA", "ONLTB", "SCOTUS", "ZZZ"];
    const JURS: &[&str] = &["CA", "CA-ON", "CA-BC", "CA-QC", "US", "US-NY", "US-CA", "??"];
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let words = |rng: &mut StdRng, n: usize| -> String {
        (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let mut pairs = 0;
    for i in 0..10_000 {
        let qj = parse_jurisdiction(JURS[rng.gen_range(0..7)]).unwrap();
        let terms: Vec<String> = (0..rng.gen_range(1..5)).map(|_| VOCAB.choose(&mut rng).unwrap().to_string()).collect();
        let q = GenericQuery::new(terms.clone(), qj.clone(), IssueCategory::CaseLaw);
        let (nt, nh) = (rng.gen_range(0..4), rng.gen_range(0..8));
        let title = words(&mut rng, nt);
        let head = words(&mut rng, nh);
        let court = rng.gen_bool(0.9).then(|| *COURTS.choose(&mut rng).unwrap());
        let jur = rng.gen_bool(0.9).then(|| *JURS.choose(&mut rng).unwrap());
        let date = rng
            .gen_bool(0.9)
            .then(|| NaiveDate::from_ymd_opt(rng.gen_range(1900..=2030), rng.gen_range(1..=12), rng.gen_range(1..=28)).unwrap());
        let a = authority(&title, &head, court, jur, date);
        let s = relevance_score(&a, &q, &cfg, now).map_err(|e| e.to_string())?;
        ensure((0.0..=1.0).contains(&s), || format!("authority {i}: score {s}"))?;
        let p = score_parts(&a, &q, &cfg.courts, now);
        for (name, v) in [
            ("term_overlap", p.term_overlap),
            ("jurisdiction", p.jurisdiction_match),
            ("court", p.court_weight),
            ("recency", p.recency),
        ] {
            ensure((0.0..=1.0).contains(&v), || format!("authority {i}: {name} = {v}"))?;
        }

        // One more query term present never lowers the score.
        let mut richer = a.clone();
        richer.headnote = Some(format!("{head} {}", terms.choose(&mut rng).unwrap()));
        let sr = relevance_score(&richer, &q, &cfg, now).map_err(|e| e.to_string())?;
        let pr = score_parts(&richer, &q, &cfg.courts, now);
        ensure(pr.term_overlap >= p.term_overlap && sr >= s, || format!("authority {i}: term monotonicity {s} -> {sr}"))?;

        // Exact region >= same country >= foreign.
        let (country, foreign) = if qj.country() == "CA" { ("CA-NS", "US-TX") } else { ("US-TX", "CA-NS") };
        let exact_code = qj.code();
        let mut scores = Vec::new();
        for j in [exact_code.as_str(), country, foreign] {
            let mut b = a.clone();
            b.jurisdiction = Some(j.to_string());
            scores.push(relevance_score(&b, &q, &cfg, now).map_err(|e| e.to_string())?);
        }
        ensure(scores[0] >= scores[1] && scores[1] >= scores[2] && scores[0] > scores[2], || {
            format!("authority {i}: jurisdiction order {scores:?}")
        })?;
        pairs += 2;
    }
    Ok(format!("10000 authorities in [0,1], {pairs} monotone pairs, 0.98 and 0.06 exact"))
}

// 8. Report compliance.
async fn ac8() -> Check {
    let cfg = config();
    let disclaimer = cfg.report.disclaimer.clone().ok_or("fixture config has no disclaimer")?;
    let golden = std::fs::read_to_string(fixtures().join("golden/clean_report.md")).unwrap();
    let mut reports = 0;
    for max_rounds in [12, 4, 1] {
        let mut cfg = config();
        cfg.interview.max_rounds = max_rounds;
        let (rt, s, _) = runtime("clean", &cfg);
        let out = drive(&rt.orchestrator, &s.file, &s.documents).await.map_err(|e| e.to_string())?;
        let report = out.report.ok_or("no report")?;
        let o = &rt.orchestrator;
        let json = o.report(&out.session_token, &out.matter_id, ReportFormat::Json).await.map_err(|e| e.to_string())?;
        let md = o.report(&out.session_token, &out.matter_id, ReportFormat::Markdown).await.map_err(|e| e.to_string())?;
        let md = String::from_utf8(md).map_err(|e| e.to_string())?;

        let back: AnalysisReport = serde_json::from_slice(&json).map_err(|e| e.to_string())?;
        ensure(back == report, || "JSON round trip changed the report".into())?;
        ensure(render_report(&back, ReportFormat::Json) == json, || "re-serialized JSON differs".into())?;
        ensure(report.disclaimer == disclaimer, || "JSON disclaimer differs from config".into())?;
        let last = md.trim_end().rsplit("\n## ").next().unwrap_or("");
        ensure(last.starts_with("Disclaimer\n") && last.contains(&disclaimer), || {
            format!("final section is not the disclaimer: {last:?}")
        })?;
        ensure(md.trim_end().ends_with(&disclaimer), || "disclaimer is not the last text".into())?;
        let html = o.report(&out.session_token, &out.matter_id, ReportFormat::Html).await.map_err(|e| e.to_string())?;
        let html = String::from_utf8(html).map_err(|e| e.to_string())?;
        let tail = html.rsplit("<section").next().unwrap_or("");
        ensure(tail.contains("class=\"disclaimer\"") && tail.contains(&disclaimer), || {
            "html does not end with the disclaimer section".into()
        })?;
        if max_rounds == 12 {
            ensure(md == golden, || "markdown differs from golden".into())?;
        }
        reports += 1;
    }
    Ok(format!("{reports} reports carry the disclaimer last, JSON round-trips, golden markdown matches"))
}

// 9. Reproducible `lices run`.
fn ac9() -> Check {
    let mut outputs = Vec::new();
    for i in 0..3 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let o = std::process::Command::new(env!("CARGO_BIN_EXE_lices"))
            .args(["run", "--config"])
            .arg(fixtures().join("lices.toml"))
            .arg("--scenario")
            .arg(scenario_dir("clean"))
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || format!("run {i} exited {:?}", o.status.code()))?;
        outputs.push(std::fs::read(dir.path().join("report.json")).map_err(|e| e.to_string())?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "report.json differs between runs".into())?;
    Ok(format!("3 runs, {} identical bytes, sha256 {}", outputs[0].len(), &hex::encode(Sha256::digest(&outputs[0]))[..16]))
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let results: Vec<(&str, Check)> = vec![
        ("AC1 parallel fan-out timing", rt.block_on(ac1())),
        ("AC2 dedup oracle equivalence", ac2()),
        ("AC3 conflict protocol safety", rt.block_on(ac3())),
        ("AC4 conflict monotonicity", ac4()),
        ("AC5 interview anti-repetition", rt.block_on(ac5())),
        ("AC6 routing table conformance", ac6()),
        ("AC7 relevance properties", ac7()),
        ("AC8 report compliance", rt.block_on(ac8())),
        ("AC9 end-to-end reproducibility", ac9()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
