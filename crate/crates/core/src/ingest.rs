//! Client document intake: plain-text extraction plus rule-based party and
//! key-term extraction for the interview and research stages.

use std::collections::{BTreeMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflict::normalize_party_name;
use crate::domain::{EntityKind, Party, PartyRole};
use crate::text::{stopwords, words};

pub const DEFAULT_MAX_BYTES: usize = 10 * 1024 * 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("document is {size} bytes, limit is {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("unsupported document format `{0}`")]
    UnsupportedFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredFormat {
    Txt,
    Md,
    PdfStub,
    DocxStub,
}

impl DeclaredFormat {
    pub fn from_filename(filename: &str) -> Result<Self, IngestError> {
        let ext = filename
            .rsplit_once('.')
            .map(|(_, e)| e.to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "txt" | "text" => Ok(DeclaredFormat::Txt),
            "md" | "markdown" => Ok(DeclaredFormat::Md),
            "pdf" => Ok(DeclaredFormat::PdfStub),
            "docx" => Ok(DeclaredFormat::DocxStub),
            _ => Err(IngestError::UnsupportedFormat(filename.to_string())),
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, DeclaredFormat::PdfStub | DeclaredFormat::DocxStub)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub matter_id: String,
    pub filename: String,
    pub declared_format: DeclaredFormat,
    pub text: String,
    /// Set for binary formats whose text has not been extracted.
    pub unextracted: bool,
    pub ingested_at: DateTime<Utc>,
}

/// Extraction hook for binary formats. The default leaves the text empty
/// and the document flagged `unextracted`.
pub trait BinaryExtractor: Send + Sync {
    fn extract(&self, format: DeclaredFormat, bytes: &[u8]) -> Option<String>;
}

#[derive(Debug, Default)]
pub struct NoExtraction;

impl BinaryExtractor for NoExtraction {
    fn extract(&self, _format: DeclaredFormat, _bytes: &[u8]) -> Option<String> {
        None
    }
}

pub struct Ingestor {
    max_bytes: usize,
    extractor: Box<dyn BinaryExtractor>,
}

impl Default for Ingestor {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_BYTES)
    }
}

impl Ingestor {
    pub fn new(max_bytes: usize) -> Self {
        Self {
            max_bytes,
            extractor: Box::new(NoExtraction),
        }
    }

    pub fn with_extractor(mut self, extractor: Box<dyn BinaryExtractor>) -> Self {
        self.extractor = extractor;
        self
    }

    /// Builds a `Document` from raw upload bytes. Format comes from the
    /// file extension; text formats are decoded as lossy UTF-8.
    pub fn ingest(
        &self,
        bytes: &[u8],
        filename: &str,
        matter_id: &str,
        doc_id: String,
        ingested_at: DateTime<Utc>,
    ) -> Result<Document, IngestError> {
        if bytes.len() > self.max_bytes {
            return Err(IngestError::TooLarge {
                size: bytes.len(),
                limit: self.max_bytes,
            });
        }
        let format = DeclaredFormat::from_filename(filename)?;
        let (text, unextracted) = if format.is_binary() {
            match self.extractor.extract(format, bytes) {
                Some(t) => (t, false),
                None => (String::new(), true),
            }
        } else {
            (String::from_utf8_lossy(bytes).into_owned(), false)
        };
        Ok(Document {
            doc_id,
            matter_id: matter_id.to_string(),
            filename: filename.to_string(),
            declared_format: format,
            text,
            unextracted,
            ingested_at,
        })
    }
}

// Capitalized words that open sentences or citations rather than names.
const NON_NAME_WORDS: &[&str] = &[
    "In", "See", "Per", "Under", "Also", "Cf", "Following", "Citing", "And", "Re", "The", "This",
    "That", "As", "From", "By", "Between", "Dear", "Signed", "Name", "Signature",
];

// Abbreviations whose trailing period belongs to the name.
const KEEP_PERIOD: &[&str] = &[
    "Inc.", "Ltd.", "Co.", "Corp.", "L.L.C.", "L.L.P.", "Jr.", "Sr.", "S.A.", "P.L.C.",
];

const SIGNATURE_PREFIXES: &[&str] = &["per:", "signed:", "signature:", "by:", "name:", "/s/"];

fn clean_token(tok: &str) -> String {
    let t = tok.trim_end_matches([',', ';', ':', ')', '"']);
    let t = t.trim_start_matches(['(', '"']);
    if t.ends_with('.') && !KEEP_PERIOD.contains(&t) {
        t.trim_end_matches('.').to_string()
    } else {
        t.to_string()
    }
}

fn is_name_token(tok: &str) -> bool {
    let t = clean_token(tok);
    if t == "&" {
        return true;
    }
    let starts_upper = t.chars().next().is_some_and(char::is_uppercase);
    starts_upper && !NON_NAME_WORDS.contains(&t.trim_end_matches('.'))
}

fn ends_clause(tok: &str) -> bool {
    let t = tok.trim_end_matches(['"', ')']);
    t.ends_with([',', ';', ':']) || (t.ends_with('.') && !KEEP_PERIOD.contains(&t))
}

fn join_name(tokens: &[&str]) -> Option<String> {
    let mut parts: Vec<String> = tokens.iter().map(|t| clean_token(t)).collect();
    while parts.last().is_some_and(|p| p == "&") {
        parts.pop();
    }
    while parts.first().is_some_and(|p| p == "&") {
        parts.remove(0);
    }
    let name = parts.join(" ");
    (!name.is_empty()).then_some(name)
}

/// Name run ending just before `end` (exclusive), walking backwards.
fn name_before(tokens: &[&str], end: usize) -> Option<String> {
    let mut start = end;
    while start > 0 {
        let t = tokens[start - 1];
        if !is_name_token(t) || (start < end && ends_clause(t)) {
            break;
        }
        start -= 1;
    }
    join_name(&tokens[start..end])
}

/// Name run starting at `begin`, walking forwards; stops after a token that
/// closes a clause.
fn name_after(tokens: &[&str], begin: usize) -> Option<String> {
    let mut end = begin;
    while end < tokens.len() && is_name_token(tokens[end]) {
        end += 1;
        if ends_clause(tokens[end - 1]) {
            break;
        }
    }
    join_name(&tokens[begin..end])
}

fn caption_names(line: &str, out: &mut Vec<String>) {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    for (i, t) in tokens.iter().enumerate() {
        if matches!(*t, "v." | "v" | "vs." | "vs") && i > 0 {
            if let (Some(a), Some(b)) = (name_before(&tokens, i), name_after(&tokens, i + 1)) {
                out.push(a);
                out.push(b);
            }
        }
    }
}

fn between_names(line: &str, out: &mut Vec<String>) {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    for (i, t) in tokens.iter().enumerate() {
        if !t.eq_ignore_ascii_case("between") {
            continue;
        }
        let Some(and_pos) = tokens[i + 1..]
            .iter()
            .position(|t| *t == "and")
            .map(|p| p + i + 1)
        else {
            continue;
        };
        let first = &tokens[i + 1..and_pos];
        if first.is_empty() || !first.iter().all(|t| is_name_token(t)) {
            continue;
        }
        if let (Some(a), Some(b)) = (join_name(first), name_after(&tokens, and_pos + 1)) {
            out.push(a);
            out.push(b);
        }
    }
}

fn signature_name(line: &str, out: &mut Vec<String>) {
    let trimmed = line.trim();
    let lower = trimmed.to_ascii_lowercase();
    for prefix in SIGNATURE_PREFIXES {
        if lower.starts_with(prefix) {
            let rest = trimmed[prefix.len()..].trim();
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if !tokens.is_empty() && tokens.iter().all(|t| is_name_token(t)) {
                if let Some(name) = join_name(&tokens) {
                    out.push(name);
                }
            }
            return;
        }
    }
}

/// Rule-based party extraction over a document's text: case captions
/// (`X v. Y`), `between X and Y` clauses, and signature-block lines. Results
/// keep document order with normalized-name duplicates removed.
pub fn extract_party_candidates(doc: &Document) -> Vec<Party> {
    extract_parties_from_text(&doc.text)
}

pub fn extract_parties_from_text(text: &str) -> Vec<Party> {
    let mut raw = Vec::new();
    for line in text.lines() {
        caption_names(line, &mut raw);
        between_names(line, &mut raw);
        signature_name(line, &mut raw);
    }
    let mut seen = HashSet::new();
    raw.into_iter()
        .filter(|name| {
            normalize_party_name(name)
                .map(|n| seen.insert(n))
                .unwrap_or(false)
        })
        .map(|raw_name| Party {
            raw_name,
            role: PartyRole::Related,
            entity_kind: EntityKind::Unknown,
        })
        .collect()
}

/// Most frequent non-stopword terms; ties break lexicographically.
pub fn extract_key_terms(doc: &Document, max_terms: usize) -> Vec<String> {
    key_terms(&doc.text, max_terms)
}

pub fn key_terms(text: &str, max_terms: usize) -> Vec<String> {
    let stop = stopwords();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for w in words(text) {
        if w.chars().count() > 1 && !stop.contains(w.as_str()) {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(max_terms).map(|(w, _)| w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at() -> DateTime<Utc> {
        "2025-01-01T00:00:00Z".parse().unwrap()
    }

    fn text_doc(text: &str) -> Document {
        Ingestor::default()
            .ingest(text.as_bytes(), "a.txt", "m1", "d1".into(), at())
            .unwrap()
    }

    fn names(parties: &[Party]) -> Vec<&str> {
        parties.iter().map(|p| p.raw_name.as_str()).collect()
    }

    #[test]
    fn text_passthrough() {
        let d = text_doc("hello world");
        assert_eq!(d.text, "hello world");
        assert_eq!(d.declared_format, DeclaredFormat::Txt);
        assert!(!d.unextracted);
    }

    #[test]
    fn binary_formats_are_flagged() {
        let ing = Ingestor::default();
        let d = ing.ingest(&[0x25, 0x50, 0xff], "scan.pdf", "m1", "d2".into(), at()).unwrap();
        assert!(d.unextracted);
        assert!(d.text.is_empty());
        assert_eq!(d.declared_format, DeclaredFormat::PdfStub);
        let d = ing.ingest(b"PK", "brief.DOCX", "m1", "d3".into(), at()).unwrap();
        assert_eq!(d.declared_format, DeclaredFormat::DocxStub);
    }

    #[test]
    fn extractor_hook_fills_text() {
        struct Fixed;
        impl BinaryExtractor for Fixed {
            fn extract(&self, _: DeclaredFormat, _: &[u8]) -> Option<String> {
                Some("extracted".into())
            }
        }
        let ing = Ingestor::default().with_extractor(Box::new(Fixed));
        let d = ing.ingest(b"%PDF", "x.pdf", "m1", "d".into(), at()).unwrap();
        assert_eq!((d.text.as_str(), d.unextracted), ("extracted", false));
    }

    #[test]
    fn size_and_format_guards() {
        let big = vec![b'a'; 11 * 1024 * 1024];
        assert_eq!(
            Ingestor::default().ingest(&big, "b.txt", "m", "d".into(), at()),
            Err(IngestError::TooLarge {
                size: big.len(),
                limit: DEFAULT_MAX_BYTES
            })
        );
        assert_eq!(
            Ingestor::default().ingest(b"x", "photo.jpeg", "m", "d".into(), at()),
            Err(IngestError::UnsupportedFormat("photo.jpeg".into()))
        );
        assert!(Ingestor::default().ingest(b"x", "noext", "m", "d".into(), at()).is_err());
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let d = Ingestor::default()
            .ingest(b"caf\xe9", "n.md", "m", "d".into(), at())
            .unwrap();
        assert_eq!(d.text, "caf\u{fffd}");
    }

    #[test]
    fn caption_rule() {
        let got = extract_party_candidates(&text_doc("Smith v. Acme Widgets Inc."));
        assert_eq!(names(&got), ["Smith", "Acme Widgets Inc."]);
        assert!(got.iter().all(|p| p.role == PartyRole::Related));
        let got = extract_party_candidates(&text_doc("In Smith v Jones, the court held"));
        assert_eq!(names(&got), ["Smith", "Jones"]);
    }

    #[test]
    fn between_and_signature_rules() {
        let got = extract_party_candidates(&text_doc(
            "This agreement is made between Northgate Properties Ltd. and Jane Doe.\nPer: Michael Ward",
        ));
        assert_eq!(names(&got), ["Northgate Properties Ltd.", "Jane Doe", "Michael Ward"]);
    }

    #[test]
    fn no_patterns_no_candidates() {
        assert!(extract_party_candidates(&text_doc("the rent is due monthly.")).is_empty());
    }

    #[test]
    fn candidates_deduplicated_by_normalized_name() {
        let got = extract_party_candidates(&text_doc(
            "Smith v. Acme Inc.\nACME v. SMITH\nSigned: Dr. Smith",
        ));
        assert_eq!(names(&got), ["Smith", "Acme Inc."]);
    }

    #[test]
    fn fixture_letter_matches_answer_key() {
        let root = env!("CARGO_MANIFEST_DIR");
        let text = std::fs::read_to_string(format!("{root}/fixtures/documents/demand_letter.txt"))
            .unwrap();
        let key: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(format!(
                "{root}/fixtures/documents/demand_letter.answer_key.json"
            ))
            .unwrap(),
        )
        .unwrap();
        let expected: Vec<&str> = key["candidates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert_eq!(names(&extract_party_candidates(&text_doc(&text))), expected);
    }

    #[test]
    fn key_terms_by_frequency() {
        assert_eq!(extract_key_terms(&text_doc("lease lease tenant"), 10), ["lease", "tenant"]);
        assert!(extract_key_terms(&text_doc("the and of it"), 10).is_empty());
        assert_eq!(extract_key_terms(&text_doc("bb aa cc bb"), 2), ["bb", "aa"]);
    }

    #[test]
    fn fixture_contract_top_terms_match_word_count_script() {
        let root = env!("CARGO_MANIFEST_DIR");
        let text =
            std::fs::read_to_string(format!("{root}/fixtures/documents/lease_agreement.txt")).unwrap();
        // Frozen from scripts/oracles.py.
        assert_eq!(
            key_terms(&text, 10),
            [
                "landlord", "rent", "breach", "month", "unit", "lease", "tenant", "deposit",
                "notice", "party"
            ]
        );
    }

    #[test]
    fn ingest_is_deterministic_modulo_id_and_time() {
        let ing = Ingestor::default();
        let a = ing.ingest(b"same", "x.md", "m", "d1".into(), at()).unwrap();
        let mut b = ing
            .ingest(b"same", "x.md", "m", "d2".into(), "2030-01-01T00:00:00Z".parse().unwrap())
            .unwrap();
        b.doc_id = a.doc_id.clone();
        b.ingested_at = a.ingested_at;
        assert_eq!(a, b);
    }
}
