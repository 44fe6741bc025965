//! Citation canonicalization, cross-provider deduplication, relevance
//! scoring and ranking.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{parse_jurisdiction, Jurisdiction};
use crate::research::{GenericQuery, ProviderId, RawResult};
use crate::text::{normalize_text, search_tokens};

const DEFAULT_COURTS: &str = include_str!("../data/courts.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsolidationError {
    #[error("citation is empty and no title is available")]
    Unkeyable,
    #[error("invalid relevance weights: {0}")]
    BadWeights(String),
    #[error("invalid court table: {0}")]
    BadCourtTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationKind {
    Neutral,
    Reporter,
    Metadata,
}

/// Provider-independent identity of an authority.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CitationKey {
    pub kind: CitationKind,
    pub key: String,
}

impl CitationKey {
    fn new(kind: CitationKind, key: String) -> Self {
        Self { kind, key }
    }
}

impl fmt::Display for CitationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

impl PartialOrd for CitationKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CitationKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key).then(self.kind.cmp(&other.kind))
    }
}

fn neutral_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b(\d{4})\s+([A-Za-z][A-Za-z0-9]{1,9})\s+(\d{1,6})\b").unwrap()
    })
}

fn reporter_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\[(\d{4})\]\s*(\d{1,4})\s+([A-Za-z][A-Za-z.\s]*?)\s*(\d{1,6})\b").unwrap()
    })
}

/// Maps a citation to its canonical key: neutral `court:year:number`,
/// reporter `year:vol:reporter:page`, or `normalized title:year` when the
/// citation matches neither form.
pub fn canonical_citation_key(
    citation: &str,
    title: Option<&str>,
    year: Option<i32>,
) -> Result<CitationKey, ConsolidationError> {
    if let Some(c) = neutral_re().captures(citation) {
        return Ok(CitationKey::new(
            CitationKind::Neutral,
            format!("{}:{}:{}", c[2].to_lowercase(), &c[1], c[3].trim_start_matches('0')),
        ));
    }
    if let Some(c) = reporter_re().captures(citation) {
        let reporter: String = c[3]
            .chars()
            .filter(|ch| ch.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        if !reporter.is_empty() {
            return Ok(CitationKey::new(
                CitationKind::Reporter,
                format!("{}:{}:{}:{}", &c[1], &c[2], reporter, &c[4]),
            ));
        }
    }
    let basis = match title.map(normalize_text).filter(|t| !t.is_empty()) {
        Some(t) => t,
        None => {
            let c = normalize_text(citation);
            if c.is_empty() {
                return Err(ConsolidationError::Unkeyable);
            }
            c
        }
    };
    Ok(CitationKey::new(
        CitationKind::Metadata,
        format!("{basis}:{}", year.map(|y| y.to_string()).unwrap_or_default()),
    ))
}

pub fn raw_result_key(r: &RawResult) -> Result<CitationKey, ConsolidationError> {
    canonical_citation_key(
        &r.citation_string,
        Some(r.title.as_str()).filter(|t| !t.trim().is_empty()),
        r.date.map(|d| d.year()),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub provider_id: ProviderId,
    pub doc_id: String,
    #[serde(default)]
    pub url: Option<String>,
}

/// One authority after merging every provider's copy of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Authority {
    pub authority_id: String,
    pub canonical_key: CitationKey,
    pub citation: String,
    pub title: String,
    pub court: Option<String>,
    pub jurisdiction: Option<String>,
    pub date: Option<NaiveDate>,
    pub headnote: Option<String>,
    pub provenance: Vec<Provenance>,
    pub relevance: f64,
}

impl Authority {
    /// Most authoritative tier among the providers that returned it.
    pub fn best_tier(&self) -> u8 {
        self.provenance
            .iter()
            .map(|p| p.provider_id.tier())
            .min()
            .unwrap_or(u8::MAX)
    }
}

pub fn authority_id(key: &CitationKey) -> String {
    let digest = Sha256::digest(format!("{:?}:{}", key.kind, key.key).as_bytes());
    format!("A-{}", &hex::encode(digest)[..12])
}

fn source_rank(r: &RawResult) -> (u8, ProviderId, &str) {
    (r.provider_id.tier(), r.provider_id, r.doc_id.as_str())
}

/// Groups results by canonical key and merges each group. Results that
/// cannot be keyed are dropped; use [`consolidate`] to keep count of them.
pub fn deduplicate(results: &[RawResult]) -> Vec<Authority> {
    let mut groups: BTreeMap<CitationKey, Vec<&RawResult>> = BTreeMap::new();
    for r in results {
        if let Ok(key) = raw_result_key(r) {
            groups.entry(key).or_default().push(r);
        }
    }
    groups.into_iter().map(|(key, group)| merge(key, group)).collect()
}

fn merge(key: CitationKey, mut group: Vec<&RawResult>) -> Authority {
    group.sort_by(|a, b| source_rank(a).cmp(&source_rank(b)));
    let lead = group[0];
    let headnote = group
        .iter()
        .filter_map(|r| r.headnote.as_deref())
        .fold(None::<&str>, |best, h| match best {
            Some(b) if b.chars().count() >= h.chars().count() => Some(b),
            _ => Some(h),
        })
        .map(str::to_string);
    let mut seen = HashSet::new();
    let provenance = group
        .iter()
        .filter(|r| seen.insert((r.provider_id, r.doc_id.as_str())))
        .map(|r| Provenance {
            provider_id: r.provider_id,
            doc_id: r.doc_id.clone(),
            url: r.url.clone(),
        })
        .collect();
    Authority {
        authority_id: authority_id(&key),
        canonical_key: key,
        citation: lead.citation_string.clone(),
        title: lead.title.clone(),
        court: group.iter().find_map(|r| r.court.clone()),
        jurisdiction: group.iter().find_map(|r| r.jurisdiction.clone()),
        date: group.iter().find_map(|r| r.date),
        headnote,
        provenance,
        relevance: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CourtClass {
    Supreme,
    Appellate,
    Trial,
    Tribunal,
    Unknown,
}

impl CourtClass {
    pub fn weight(self) -> f64 {
        match self {
            CourtClass::Supreme => 1.0,
            CourtClass::Appellate => 0.8,
            CourtClass::Trial => 0.6,
            CourtClass::Tribunal => 0.4,
            CourtClass::Unknown => 0.3,
        }
    }
}

/// Court code (case-insensitive) to court class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CourtTable(pub HashMap<String, CourtClass>);

impl Default for CourtTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_COURTS).expect("bundled court table is valid")
    }
}

impl CourtTable {
    pub fn from_json(json: &str) -> Result<Self, ConsolidationError> {
        let raw: HashMap<String, CourtClass> =
            serde_json::from_str(json).map_err(|e| ConsolidationError::BadCourtTable(e.to_string()))?;
        Ok(Self(raw.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect()))
    }

    pub fn class_of(&self, court: Option<&str>) -> CourtClass {
        court
            .and_then(|c| self.0.get(&c.to_lowercase()).copied())
            .unwrap_or(CourtClass::Unknown)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceWeights {
    pub term: f64,
    pub jurisdiction: f64,
    pub court: f64,
    pub recency: f64,
}

impl Default for RelevanceWeights {
    fn default() -> Self {
        Self {
            term: 0.5,
            jurisdiction: 0.2,
            court: 0.2,
            recency: 0.1,
        }
    }
}

impl RelevanceWeights {
    pub fn validate(&self) -> Result<(), ConsolidationError> {
        let all = [self.term, self.jurisdiction, self.court, self.recency];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ConsolidationError::BadWeights(format!("{all:?} has a negative or non-finite weight")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConsolidationError::BadWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingConfig {
    #[serde(default)]
    pub weights: RelevanceWeights,
    #[serde(default)]
    pub courts: CourtTable,
}

/// The four score components, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParts {
    pub term_overlap: f64,
    pub jurisdiction_match: f64,
    pub court_weight: f64,
    pub recency: f64,
}

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

pub fn term_overlap(a: &Authority, terms: &[String]) -> f64 {
    let terms: Vec<Vec<String>> = terms
        .iter()
        .map(|t| search_tokens(t).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect();
    if terms.is_empty() {
        return 0.0;
    }
    let have: HashSet<String> = search_tokens(&a.title)
        .chain(a.headnote.as_deref().map(search_tokens).into_iter().flatten())
        .collect();
    let present = terms.iter().filter(|t| t.iter().all(|w| have.contains(w))).count();
    present as f64 / terms.len() as f64
}

pub fn jurisdiction_match(authority: Option<&str>, query: &Jurisdiction) -> f64 {
    match authority.and_then(|j| parse_jurisdiction(j).ok()) {
        Some(j) if &j == query => 1.0,
        Some(j) if j.country() == query.country() => 0.5,
        _ => 0.0,
    }
}

pub fn recency(date: Option<NaiveDate>, now: DateTime<Utc>) -> f64 {
    let Some(date) = date else { return 0.0 };
    let decided = date.and_hms_opt(0, 0, 0).unwrap().and_utc();
    let age_years = (now - decided).num_seconds() as f64 / SECONDS_PER_YEAR;
    (1.0 - age_years / 50.0).clamp(0.0, 1.0)
}

pub fn score_parts(
    a: &Authority,
    q: &GenericQuery,
    courts: &CourtTable,
    now: DateTime<Utc>,
) -> ScoreParts {
    ScoreParts {
        term_overlap: term_overlap(a, &q.terms),
        jurisdiction_match: jurisdiction_match(a.jurisdiction.as_deref(), &q.jurisdiction),
        court_weight: courts.class_of(a.court.as_deref()).weight(),
        recency: recency(a.date, now),
    }
}

/// Weighted linear relevance in [0, 1].
pub fn relevance_score(
    a: &Authority,
    q: &GenericQuery,
    cfg: &RankingConfig,
    now: DateTime<Utc>,
) -> Result<f64, ConsolidationError> {
    cfg.weights.validate()?;
    let p = score_parts(a, q, &cfg.courts, now);
    let w = cfg.weights;
    let s = w.term * p.term_overlap
        + w.jurisdiction * p.jurisdiction_match
        + w.court * p.court_weight
        + w.recency * p.recency;
    Ok(s.clamp(0.0, 1.0))
}

/// Orders by relevance descending, then most authoritative tier, then key.
pub fn rank(mut authorities: Vec<Authority>) -> Vec<Authority> {
    authorities.sort_by(|a, b| {
        b.relevance
            .total_cmp(&a.relevance)
            .then(a.best_tier().cmp(&b.best_tier()))
            .then_with(|| a.canonical_key.cmp(&b.canonical_key))
    });
    authorities
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consolidated {
    pub raw_count: usize,
    pub authorities: Vec<Authority>,
    /// Results that carried neither a citation nor a title.
    pub unkeyable: Vec<Provenance>,
}

/// Dedup, score and rank in one step.
pub fn consolidate(
    results: &[RawResult],
    q: &GenericQuery,
    cfg: &RankingConfig,
    now: DateTime<Utc>,
) -> Result<Consolidated, ConsolidationError> {
    cfg.weights.validate()?;
    let unkeyable = results
        .iter()
        .filter(|r| raw_result_key(r).is_err())
        .map(|r| Provenance {
            provider_id: r.provider_id,
            doc_id: r.doc_id.clone(),
            url: r.url.clone(),
        })
        .collect();
    let mut authorities = deduplicate(results);
    for a in &mut authorities {
        a.relevance = relevance_score(a, q, cfg, now)?;
    }
    Ok(Consolidated {
        raw_count: results.len(),
        authorities: rank(authorities),
        unkeyable,
    })
}
