//! Two-stage conflict-of-interest screening against the firm's internal
//! conflict database.
//!
//! Party names are normalized (case, punctuation, corporate suffixes,
//! honorifics) and compared with a token-level similarity. An exact
//! normalized match is a `Conflict`; anything at or above the configured
//! threshold is a `PotentialConflict`. Both verdicts stop the pipeline.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ClientProfile, Party};
use crate::text::normalize_text;

pub const DEFAULT_THRESHOLD: f64 = 0.85;

const CORPORATE_SUFFIXES: &[&str] = &[
    "inc", "ltd", "llc", "llp", "corp", "co", "plc", "sa", "gmbh",
];
const HONORIFICS: &[&str] = &["mr", "ms", "mrs", "dr"];

#[derive(Debug, Error)]
pub enum ConflictError {
    #[error("name `{0}` is empty after normalization")]
    EmptyAfterNormalization(String),
    #[error("conflict store unavailable: {0}")]
    StoreUnavailable(String),
    #[error("conflict db line {line}: {message}")]
    InvalidRecord { line: usize, message: String },
    #[error("duplicate conflict record id `{0}`")]
    DuplicateRecord(String),
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Lowercase, strip punctuation, collapse whitespace, then drop honorifics
/// from the head and corporate suffixes from the tail.
pub fn normalize_party_name(raw: &str) -> Result<String, ConflictError> {
    let base = normalize_text(raw);
    let mut tokens: Vec<&str> = base.split(' ').filter(|t| !t.is_empty()).collect();
    while tokens.first().is_some_and(|t| HONORIFICS.contains(t)) {
        tokens.remove(0);
    }
    while tokens.last().is_some_and(|t| CORPORATE_SUFFIXES.contains(t)) {
        tokens.pop();
    }
    if tokens.is_empty() {
        return Err(ConflictError::EmptyAfterNormalization(raw.to_string()));
    }
    Ok(tokens.join(" "))
}

fn token_ratio(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Similarity of two normalized names in `[0, 1]`.
///
/// The mean of a multiset Dice coefficient over tokens and the average of
/// each token's best edit-distance ratio against the other side. The value
/// 1.0 is reserved for identical strings; a reordering of the same tokens
/// scores just below it.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let ta: Vec<&str> = a.split_whitespace().collect();
    let tb: Vec<&str> = b.split_whitespace().collect();
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }

    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in &ta {
        *counts.entry(t).or_default() += 1;
    }
    let mut shared = 0usize;
    for t in &tb {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                shared += 1;
            }
        }
    }
    let dice = 2.0 * shared as f64 / (ta.len() + tb.len()) as f64;

    let best = |x: &str, others: &[&str]| {
        others
            .iter()
            .map(|y| token_ratio(x, y))
            .fold(0.0_f64, f64::max)
    };
    let total: f64 = ta.iter().map(|x| best(x, &tb)).sum::<f64>()
        + tb.iter().map(|y| best(y, &ta)).sum::<f64>();
    let pairing = total / (ta.len() + tb.len()) as f64;

    let score = ((dice + pairing) / 2.0).clamp(0.0, 1.0);
    if score >= 1.0 {
        1.0_f64.next_down()
    } else {
        score
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSide {
    OurClient,
    Adverse,
    Related,
}

/// One line of the conflict database file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordLine {
    record_id: String,
    matter_ref: String,
    party_name: String,
    side: RecordSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub record_id: String,
    pub matter_ref: String,
    pub party_name: String,
    pub normalized_name: String,
    pub side: RecordSide,
}

impl ConflictRecord {
    pub fn new(
        record_id: impl Into<String>,
        matter_ref: impl Into<String>,
        party_name: impl Into<String>,
        side: RecordSide,
    ) -> Result<Self, ConflictError> {
        let party_name = party_name.into();
        Ok(Self {
            normalized_name: normalize_party_name(&party_name)?,
            record_id: record_id.into(),
            matter_ref: matter_ref.into(),
            party_name,
            side,
        })
    }
}

/// In-memory conflict database, optionally backed by a JSON-lines file.
///
/// Reads take a cheap snapshot; appends are serialized and written through
/// to the backing file before they become visible.
#[derive(Debug, Default)]
pub struct ConflictStore {
    records: RwLock<Arc<Vec<ConflictRecord>>>,
    path: Option<PathBuf>,
    write_lock: Mutex<()>,
}

impl ConflictStore {
    pub fn in_memory(records: Vec<ConflictRecord>) -> Result<Self, ConflictError> {
        check_unique(&records)?;
        Ok(Self {
            records: RwLock::new(Arc::new(records)),
            path: None,
            write_lock: Mutex::new(()),
        })
    }

    /// Loads a JSON-lines file. A missing file is an empty store that will
    /// be created on first append.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ConflictError> {
        let path = path.as_ref();
        let mut records = Vec::new();
        if path.exists() {
            let file = File::open(path)
                .map_err(|e| ConflictError::StoreUnavailable(format!("{}: {e}", path.display())))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| ConflictError::StoreUnavailable(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let invalid = |message: String| ConflictError::InvalidRecord {
                    line: idx + 1,
                    message,
                };
                let raw: RecordLine =
                    serde_json::from_str(&line).map_err(|e| invalid(e.to_string()))?;
                let record =
                    ConflictRecord::new(raw.record_id, raw.matter_ref, raw.party_name, raw.side)
                        .map_err(|e| invalid(e.to_string()))?;
                records.push(record);
            }
        }
        check_unique(&records)?;
        Ok(Self {
            records: RwLock::new(Arc::new(records)),
            path: Some(path.to_path_buf()),
            write_lock: Mutex::new(()),
        })
    }

    pub fn snapshot(&self) -> Result<Arc<Vec<ConflictRecord>>, ConflictError> {
        self.records
            .read()
            .map(|g| Arc::clone(&g))
            .map_err(|_| ConflictError::StoreUnavailable("store lock poisoned".into()))
    }

    pub fn len(&self) -> usize {
        self.snapshot().map(|r| r.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends a record, writing it to the backing file first.
    pub fn append(&self, record: ConflictRecord) -> Result<(), ConflictError> {
        let _guard = self
            .write_lock
            .lock()
            .map_err(|_| ConflictError::StoreUnavailable("store lock poisoned".into()))?;
        let current = self.snapshot()?;
        if current.iter().any(|r| r.record_id == record.record_id) {
            return Err(ConflictError::DuplicateRecord(record.record_id));
        }
        if let Some(path) = &self.path {
            let line = serde_json::to_string(&RecordLine {
                record_id: record.record_id.clone(),
                matter_ref: record.matter_ref.clone(),
                party_name: record.party_name.clone(),
                side: record.side,
            })
            .map_err(|e| ConflictError::StoreUnavailable(e.to_string()))?;
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| ConflictError::StoreUnavailable(e.to_string()))?;
            writeln!(file, "{line}").map_err(|e| ConflictError::StoreUnavailable(e.to_string()))?;
        }
        let mut next = current.as_ref().clone();
        next.push(record);
        *self
            .records
            .write()
            .map_err(|_| ConflictError::StoreUnavailable("store lock poisoned".into()))? =
            Arc::new(next);
        Ok(())
    }
}

fn check_unique(records: &[ConflictRecord]) -> Result<(), ConflictError> {
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if !seen.insert(r.record_id.as_str()) {
            return Err(ConflictError::DuplicateRecord(r.record_id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Clear,
    PotentialConflict,
    Conflict,
}

impl Verdict {
    pub fn blocks(self) -> bool {
        self != Verdict::Clear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStage {
    Preliminary,
    Comprehensive,
}

impl CheckStage {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStage::Preliminary => "preliminary",
            CheckStage::Comprehensive => "comprehensive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictHit {
    pub query_party: String,
    pub record: ConflictRecord,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictOutcome {
    pub verdict: Verdict,
    pub hits: Vec<ConflictHit>,
    pub stage: CheckStage,
}

/// Matching policy. The threshold applies to near matches only; exact
/// normalized matches always produce `Conflict`.
#[derive(Debug, Clone, Copy)]
pub struct ConflictChecker {
    threshold: f64,
}

impl Default for ConflictChecker {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl ConflictChecker {
    pub fn new(threshold: f64) -> Result<Self, ConflictError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(ConflictError::InvalidThreshold(threshold));
        }
        Ok(Self { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn preliminary_check(
        &self,
        client: &ClientProfile,
        store: &ConflictStore,
    ) -> Result<ConflictOutcome, ConflictError> {
        self.check(&client.parties, store, CheckStage::Preliminary)
    }

    pub fn comprehensive_check(
        &self,
        all_parties: &[Party],
        store: &ConflictStore,
    ) -> Result<ConflictOutcome, ConflictError> {
        self.check(all_parties, store, CheckStage::Comprehensive)
    }

    fn check(
        &self,
        parties: &[Party],
        store: &ConflictStore,
        stage: CheckStage,
    ) -> Result<ConflictOutcome, ConflictError> {
        let records = store.snapshot()?;
        let mut hits = Vec::new();
        for party in parties {
            let query = normalize_party_name(&party.raw_name)?;
            for record in records.iter() {
                let similarity = name_similarity(&query, &record.normalized_name);
                if similarity >= self.threshold {
                    hits.push(ConflictHit {
                        query_party: party.raw_name.clone(),
                        record: record.clone(),
                        similarity,
                    });
                }
            }
        }
        hits.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.record.record_id.cmp(&b.record.record_id))
                .then_with(|| a.query_party.cmp(&b.query_party))
        });
        let verdict = match hits.first() {
            Some(h) if h.similarity == 1.0 => Verdict::Conflict,
            Some(_) => Verdict::PotentialConflict,
            None => Verdict::Clear,
        };
        Ok(ConflictOutcome {
            verdict,
            hits,
            stage,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_jurisdiction, PartyRole};
    use proptest::prelude::*;

    fn client(names: &[&str]) -> ClientProfile {
        let mut parties = vec![Party::new(names[0], PartyRole::Client)];
        parties.extend(names[1..].iter().map(|n| Party::new(*n, PartyRole::Opposing)));
        ClientProfile {
            client_id: "c1".into(),
            parties,
            jurisdiction: parse_jurisdiction("CA-ON").unwrap(),
            contact: String::new(),
        }
    }

    fn record(id: &str, name: &str, side: RecordSide) -> ConflictRecord {
        ConflictRecord::new(id, "m-old", name, side).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_party_name("Acme Widgets, Inc.").unwrap(), "acme widgets");
        assert_eq!(normalize_party_name("Dr. Jane  O'Neil").unwrap(), "jane oneil");
        assert!(matches!(
            normalize_party_name("Ltd."),
            Err(ConflictError::EmptyAfterNormalization(_))
        ));
        assert_eq!(normalize_party_name("Foo Co. Ltd.").unwrap(), "foo");
        assert_eq!(normalize_party_name("Mr. Mrs. Smith").unwrap(), "smith");
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(name_similarity("acme widgets", "acme widgets"), 1.0);
        let disjoint = name_similarity("acme widgets", "zzz qqq");
        assert_eq!(disjoint, 0.0);
        // Frozen from scripts/oracles.py (direct evaluation of the formula).
        assert!((name_similarity("john smith", "jon smith") - 0.6875).abs() < 1e-12);
        assert!((name_similarity("jane oneil", "jane o neil") - 0.58).abs() < 1e-12);
    }

    #[test]
    fn reordered_tokens_fall_just_short_of_exact() {
        let s = name_similarity("john smith", "smith john");
        assert!(s < 1.0 && s > 0.999_999);
    }

    #[test]
    fn preliminary_exact_collision_is_conflict() {
        let store =
            ConflictStore::in_memory(vec![record("r1", "ACME WIDGETS", RecordSide::Adverse)])
                .unwrap();
        let out = ConflictChecker::default()
            .preliminary_check(&client(&["Acme Widgets Inc."]), &store)
            .unwrap();
        assert_eq!(out.verdict, Verdict::Conflict);
        assert_eq!(out.stage, CheckStage::Preliminary);
        assert_eq!(out.hits.len(), 1);
        assert_eq!(out.hits[0].similarity, 1.0);
    }

    #[test]
    fn empty_store_is_clear() {
        let store = ConflictStore::default();
        let out = ConflictChecker::default()
            .preliminary_check(&client(&["Jane Doe", "Acme"]), &store)
            .unwrap();
        assert_eq!(out.verdict, Verdict::Clear);
        assert!(out.hits.is_empty());
    }

    #[test]
    fn near_miss_verdict_follows_threshold() {
        // 0.6875 is below the 0.85 default, so "Jon Smith" clears against
        // "John Smith"; a lower threshold turns it into a potential conflict.
        let store =
            ConflictStore::in_memory(vec![record("r1", "John Smith", RecordSide::Adverse)])
                .unwrap();
        let c = client(&["Jon Smith"]);
        let default = ConflictChecker::default().preliminary_check(&c, &store).unwrap();
        assert_eq!(default.verdict, Verdict::Clear);
        let loose = ConflictChecker::new(0.65).unwrap().preliminary_check(&c, &store).unwrap();
        assert_eq!(loose.verdict, Verdict::PotentialConflict);
        assert!((loose.hits[0].similarity - 0.6875).abs() < 1e-12);
    }

    #[test]
    fn reordered_name_is_potential_conflict_at_default_threshold() {
        let store =
            ConflictStore::in_memory(vec![record("r1", "Smith John", RecordSide::Adverse)])
                .unwrap();
        let out = ConflictChecker::default()
            .preliminary_check(&client(&["John Smith"]), &store)
            .unwrap();
        assert_eq!(out.verdict, Verdict::PotentialConflict);
    }

    #[test]
    fn comprehensive_superset_detects_document_party() {
        let store =
            ConflictStore::in_memory(vec![record("r9", "Harbour Holdings", RecordSide::Adverse)])
                .unwrap();
        let c = client(&["Jane Doe", "Northgate Properties Ltd."]);
        let checker = ConflictChecker::default();
        let prelim = checker.preliminary_check(&c, &store).unwrap();
        assert_eq!(prelim.verdict, Verdict::Clear);
        let mut all = c.parties.clone();
        all.push(Party::new("Harbour Holdings Ltd.", PartyRole::Related));
        let comp = checker.comprehensive_check(&all, &store).unwrap();
        assert_eq!(comp.verdict, Verdict::Conflict);
        assert_eq!(comp.stage, CheckStage::Comprehensive);
        let same = checker.comprehensive_check(&c.parties, &store).unwrap();
        assert_eq!(same.verdict, prelim.verdict);
    }

    #[test]
    fn planted_exact_matches_all_found_in_large_store() {
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let mut records = Vec::new();
        for i in 0..950 {
            let name: String = (0..2)
                .map(|_| {
                    (0..rng.gen_range(4..9))
                        .map(|_| rng.gen_range(b'a'..=b'z') as char)
                        .collect::<String>()
                })
                .collect::<Vec<_>>()
                .join(" ");
            records.push(record(&format!("r{i:04}"), &name, RecordSide::Adverse));
        }
        let planted = ["Target Party Number"];
        for i in 0..50 {
            records.push(record(&format!("p{i:03}"), planted[0], RecordSide::Adverse));
        }
        let store = ConflictStore::in_memory(records.clone()).unwrap();
        let out = ConflictChecker::default()
            .comprehensive_check(&[Party::new("TARGET party number", PartyRole::Related)], &store)
            .unwrap();
        // Exhaustive scan oracle.
        let expected: Vec<_> = records
            .iter()
            .filter(|r| r.normalized_name == "target party number")
            .map(|r| r.record_id.clone())
            .collect();
        let exact: Vec<_> = out
            .hits
            .iter()
            .filter(|h| h.similarity == 1.0)
            .map(|h| h.record.record_id.clone())
            .collect();
        assert_eq!(expected.len(), 50);
        assert_eq!(exact, expected);
        assert_eq!(out.verdict, Verdict::Conflict);
    }

    #[test]
    fn hits_ordered_by_similarity_then_record_id() {
        let store = ConflictStore::in_memory(vec![
            record("r3", "Smith John", RecordSide::Adverse),
            record("r2", "John Smith", RecordSide::Related),
            record("r1", "John Smith", RecordSide::Adverse),
        ])
        .unwrap();
        let out = ConflictChecker::default()
            .preliminary_check(&client(&["John Smith"]), &store)
            .unwrap();
        let ids: Vec<_> = out.hits.iter().map(|h| h.record.record_id.as_str()).collect();
        assert_eq!(ids, ["r1", "r2", "r3"]);
    }

    #[test]
    fn file_store_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.jsonl");
        std::fs::write(
            &path,
            "{\"record_id\":\"r1\",\"matter_ref\":\"m1\",\"party_name\":\"Acme Inc.\",\"side\":\"adverse\"}\n",
        )
        .unwrap();
        let store = ConflictStore::open(&path).unwrap();
        assert_eq!(store.len(), 1);
        store
            .append(record("r2", "Beta LLC", RecordSide::OurClient))
            .unwrap();
        assert!(matches!(
            store.append(record("r2", "Other", RecordSide::Related)),
            Err(ConflictError::DuplicateRecord(_))
        ));
        let reopened = ConflictStore::open(&path).unwrap();
        assert_eq!(reopened.len(), 2);
        assert_eq!(reopened.snapshot().unwrap()[1].normalized_name, "beta");

        std::fs::write(&path, "{\"record_id\":\"r1\"}\n").unwrap();
        assert!(matches!(
            ConflictStore::open(&path),
            Err(ConflictError::InvalidRecord { line: 1, .. })
        ));
    }

    #[test]
    fn threshold_validation() {
        assert!(ConflictChecker::new(0.0).is_err());
        assert!(ConflictChecker::new(1.2).is_err());
        assert!(ConflictChecker::new(f64::NAN).is_err());
        assert!(ConflictChecker::new(1.0).is_ok());
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec("[a-e]{1,5}", 1..4).prop_map(|v| v.join(" "))
    }

    proptest! {
        #[test]
        fn similarity_symmetric_bounded_reflexive(a in name_strategy(), b in name_strategy()) {
            let ab = name_similarity(&a, &b);
            let ba = name_similarity(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(name_similarity(&a, &a), 1.0);
            prop_assert_eq!(ab == 1.0, a == b);
        }

        #[test]
        fn superset_never_weakens_verdict(
            db in proptest::collection::vec(name_strategy(), 0..12),
            base in proptest::collection::vec(name_strategy(), 1..4),
            extra in proptest::collection::vec(name_strategy(), 0..4),
        ) {
            let records: Vec<_> = db.iter().enumerate()
                .map(|(i, n)| record(&format!("r{i}"), n, RecordSide::Adverse))
                .collect();
            let store = ConflictStore::in_memory(records).unwrap();
            let base: Vec<_> = base.iter().map(|n| Party::new(n.clone(), PartyRole::Opposing)).collect();
            let mut sup = base.clone();
            sup.extend(extra.iter().map(|n| Party::new(n.clone(), PartyRole::Related)));
            let checker = ConflictChecker::default();
            let a = checker.comprehensive_check(&base, &store).unwrap();
            let b = checker.comprehensive_check(&sup, &store).unwrap();
            prop_assert!(b.verdict >= a.verdict);
        }
    }
}
