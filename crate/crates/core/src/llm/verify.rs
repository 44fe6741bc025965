use std::sync::OnceLock;

use async_trait::async_trait;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{LlmError, StructuredAnalysis};
use crate::consolidation::{canonical_citation_key, Authority, CitationKey, CitationKind};

pub const UNRESOLVED: &str = "UNRESOLVED";

/// Outcome for one authority hint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationCheck {
    pub hint: String,
    /// Matching authority id, or `None` when unresolved.
    pub authority_id: Option<String>,
}

impl CitationCheck {
    pub fn is_resolved(&self) -> bool {
        self.authority_id.is_some()
    }

    pub fn resolution(&self) -> &str {
        self.authority_id.as_deref().unwrap_or(UNRESOLVED)
    }
}

/// Optional second opinion on a key match.
#[async_trait]
pub trait CitationVerifier: Send + Sync {
    async fn confirm(&self, hint: &str, authority: &Authority) -> Result<bool, LlmError>;
}

fn year_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(?\b(1[89]\d\d|20\d\d)\b\)?").unwrap())
}

fn hint_key(hint: &str) -> Option<CitationKey> {
    let key = canonical_citation_key(hint, None, None).ok()?;
    if key.kind != CitationKind::Metadata {
        return Some(key);
    }
    // "Smith v Jones (2010)" style: the year rides along with the title.
    let year_match = year_re().find_iter(hint).last()?;
    let year: i32 = year_re().captures(year_match.as_str())?[1].parse().ok()?;
    let title = format!("{}{}", &hint[..year_match.start()], &hint[year_match.end()..]);
    let title = title.trim().trim_end_matches(',');
    canonical_citation_key("", Some(title), Some(year)).ok()
}

pub fn resolve_hint<'a>(hint: &str, authorities: &'a [Authority]) -> Option<&'a Authority> {
    let key = hint_key(hint)?;
    authorities.iter().find(|a| a.canonical_key == key)
}

/// Resolves each hint by canonical key equality against the list.
pub fn verify_citations(analysis: &StructuredAnalysis, authorities: &[Authority]) -> Vec<CitationCheck> {
    analysis
        .authority_hints
        .iter()
        .map(|hint| CitationCheck {
            hint: hint.clone(),
            authority_id: resolve_hint(hint, authorities).map(|a| a.authority_id.clone()),
        })
        .collect()
}

/// As [`verify_citations`], then asks the verifier to confirm each match.
/// A rejected match becomes unresolved; an unreachable verifier leaves the
/// key match standing.
pub async fn verify_citations_with(
    analysis: &StructuredAnalysis,
    authorities: &[Authority],
    verifier: &dyn CitationVerifier,
) -> Vec<CitationCheck> {
    let mut checks = verify_citations(analysis, authorities);
    for check in &mut checks {
        let Some(id) = check.authority_id.clone() else { continue };
        let Some(a) = authorities.iter().find(|a| a.authority_id == id) else { continue };
        match verifier.confirm(&check.hint, a).await {
            Ok(true) => {}
            Ok(false) => check.authority_id = None,
            Err(e) => log::warn!("citation verifier skipped `{}`: {e}", check.hint),
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consolidation::deduplicate;
    use crate::research::{ProviderId, RawResult};

    fn raw(citation: &str, title: &str, year: i32) -> RawResult {
        RawResult {
            provider_id: ProviderId::Scc,
            doc_id: citation.into(),
            title: title.into(),
            citation_string: citation.into(),
            court: None,
            jurisdiction: None,
            date: chrono::NaiveDate::from_ymd_opt(year, 3, 1),
            headnote: None,
            score_provider: None,
            url: None,
        }
    }

    fn analysis(hints: &[&str]) -> StructuredAnalysis {
        StructuredAnalysis {
            material_facts: vec![],
            legal_issues: vec!["i".into()],
            authority_hints: hints.iter().map(|s| s.to_string()).collect(),
            recommended_actions: vec![],
        }
    }

    #[test]
    fn resolution_by_key() {
        let auths = deduplicate(&[
            raw("2015 SCC 5", "Carter v Canada", 2015),
            raw("[1999] 2 S.C.R. 817", "Baker v Canada", 1999),
            raw("", "Smith v Jones", 2010),
        ]);
        let checks = verify_citations(
            &analysis(&["2015 SCC 5", "9999 ZZZ 1", "[1999] 2 SCR 817", "Smith v. Jones (2010)", "Nobody v Nothing"]),
            &auths,
        );
        let resolved: Vec<bool> = checks.iter().map(CitationCheck::is_resolved).collect();
        assert_eq!(resolved, [true, false, true, true, false]);
        assert_eq!(checks[1].resolution(), UNRESOLVED);
    }

    struct Reject;

    #[async_trait]
    impl CitationVerifier for Reject {
        async fn confirm(&self, hint: &str, _a: &Authority) -> Result<bool, LlmError> {
            Ok(!hint.contains("SCC"))
        }
    }

    #[tokio::test]
    async fn verifier_can_veto() {
        let auths = deduplicate(&[raw("2015 SCC 5", "Carter", 2015), raw("2001 ONCA 1", "X", 2001)]);
        let checks = verify_citations_with(&analysis(&["2015 SCC 5", "2001 ONCA 1"]), &auths, &Reject).await;
        assert!(!checks[0].is_resolved());
        assert!(checks[1].is_resolved());
    }
}
