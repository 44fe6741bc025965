use std::collections::{HashMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Jurisdiction;
use crate::research::{ParsedQuery, ProviderId, RawResult};
use crate::text::search_tokens;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {message}")]
    Io { path: String, message: String },
    #[error("corpus line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("corpus line {line}: duplicate doc id {provider_id}/{doc_id}")]
    DuplicateDocId {
        line: usize,
        provider_id: ProviderId,
        doc_id: String,
    },
}

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub provider_id: ProviderId,
    pub doc_id: String,
    pub title: String,
    pub citation_string: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral_citation: Option<String>,
    pub court: String,
    pub jurisdiction: Jurisdiction,
    pub date: NaiveDate,
    pub headnote: String,
    pub body: String,
    pub url: String,
}

impl CorpusEntry {
    pub fn to_raw(&self, score: f64) -> RawResult {
        RawResult {
            provider_id: self.provider_id,
            doc_id: self.doc_id.clone(),
            title: self.title.clone(),
            citation_string: self.citation_string.clone(),
            court: Some(self.court.clone()),
            jurisdiction: Some(self.jurisdiction.code()),
            date: Some(self.date),
            headnote: Some(self.headnote.clone()),
            score_provider: Some(score),
            url: Some(self.url.clone()),
        }
    }

    fn searchable(&self) -> impl Iterator<Item = String> + '_ {
        search_tokens(&self.title)
            .chain(search_tokens(&self.headnote))
            .chain(search_tokens(&self.body))
    }
}

#[derive(Debug, Default)]
struct ProviderSlice {
    /// token -> entry indexes containing it, ascending.
    postings: HashMap<String, Vec<usize>>,
}

/// Immutable corpus with a per-provider inverted index over title,
/// headnote and body tokens.
#[derive(Debug, Default)]
pub struct CorpusIndex {
    entries: Vec<CorpusEntry>,
    term_counts: Vec<HashMap<String, u32>>,
    slices: HashMap<ProviderId, ProviderSlice>,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<CorpusIndex, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    CorpusIndex::from_jsonl(&text)
}

impl CorpusIndex {
    /// Parses JSON lines; blank lines are skipped, line numbers are 1-based.
    pub fn from_jsonl(text: &str) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CorpusEntry =
                serde_json::from_str(line).map_err(|e| CorpusError::ParseError {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if !seen.insert((entry.provider_id, entry.doc_id.clone())) {
                return Err(CorpusError::DuplicateDocId {
                    line: i + 1,
                    provider_id: entry.provider_id,
                    doc_id: entry.doc_id,
                });
            }
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    fn from_entries(entries: Vec<CorpusEntry>) -> Self {
        let mut term_counts = Vec::with_capacity(entries.len());
        let mut slices: HashMap<ProviderId, ProviderSlice> = HashMap::new();
        for (idx, e) in entries.iter().enumerate() {
            let mut counts: HashMap<String, u32> = HashMap::new();
            for tok in e.searchable() {
                *counts.entry(tok).or_default() += 1;
            }
            let slice = slices.entry(e.provider_id).or_default();
            for tok in counts.keys() {
                slice.postings.entry(tok.clone()).or_default().push(idx);
            }
            term_counts.push(counts);
        }
        Self {
            entries,
            term_counts,
            slices,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn provider_entries(&self, id: ProviderId) -> impl Iterator<Item = &CorpusEntry> {
        self.entries.iter().filter(move |e| e.provider_id == id)
    }

    /// Conjunctive search within one provider's documents. Every token of
    /// every term must occur; hits are ordered by summed term frequency,
    /// then doc id.
    pub fn search(&self, provider: ProviderId, q: &ParsedQuery, max: usize) -> Vec<RawResult> {
        let tokens: Vec<String> = {
            let mut seen = HashSet::new();
            q.terms
                .iter()
                .flat_map(|t| search_tokens(t).collect::<Vec<_>>())
                .filter(|t| seen.insert(t.clone()))
                .collect()
        };
        let Some(slice) = self.slices.get(&provider) else {
            return Vec::new();
        };
        if tokens.is_empty() {
            return Vec::new();
        }
        let Some(candidates) = tokens
            .iter()
            .map(|t| slice.postings.get(t))
            .collect::<Option<Vec<_>>>()
            .and_then(|lists| lists.into_iter().min_by_key(|l| l.len()))
        else {
            return Vec::new();
        };

        let mut hits: Vec<(u32, &CorpusEntry)> = candidates
            .iter()
            .filter_map(|&idx| {
                let counts = &self.term_counts[idx];
                let mut tf = 0;
                for t in &tokens {
                    tf += *counts.get(t)?;
                }
                Some((tf, &self.entries[idx]))
            })
            .filter(|(_, e)| {
                q.jurisdiction
                    .as_ref()
                    .is_none_or(|j| j.covers(&e.jurisdiction))
            })
            .filter(|(_, e)| {
                q.date_range
                    .is_none_or(|r| r.from <= e.date && e.date <= r.to)
            })
            .collect();
        hits.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.doc_id.cmp(&b.1.doc_id)));
        hits.truncate(max);
        hits.into_iter().map(|(tf, e)| e.to_raw(tf as f64)).collect()
    }
}
