//! Shared vocabulary types: jurisdictions, parties, client profiles, matters,
//! and the pipeline status state machine.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const JURISDICTION_TABLE: &str = include_str!("../data/jurisdictions.tsv");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown jurisdiction `{0}`")]
    UnknownJurisdiction(String),
}

fn supported_table() -> &'static BTreeMap<String, String> {
    static TABLE: OnceLock<BTreeMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        JURISDICTION_TABLE
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let (code, name) = l.split_once('\t')?;
                Some((code.trim().to_string(), name.trim().to_string()))
            })
            .collect()
    })
}

/// Every supported jurisdiction code with its display name, in code order.
pub fn supported_jurisdictions() -> impl Iterator<Item = (&'static str, &'static str)> {
    supported_table()
        .iter()
        .map(|(c, n)| (c.as_str(), n.as_str()))
}

/// A country with an optional sub-national region, e.g. `CA-ON`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Jurisdiction {
    country: String,
    region: Option<String>,
}

impl Jurisdiction {
    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn region(&self) -> Option<&str> {
        self.region.as_deref()
    }

    pub fn code(&self) -> String {
        self.to_string()
    }

    pub fn display_name(&self) -> &'static str {
        supported_table()
            .get(&self.code())
            .map(String::as_str)
            .unwrap_or("")
    }

    /// True when a record filed under `other` falls inside this jurisdiction:
    /// same country, and either this is country-wide, the record is
    /// country-wide (federal), or the regions agree.
    pub fn covers(&self, other: &Jurisdiction) -> bool {
        if self.country != other.country {
            return false;
        }
        match (&self.region, &other.region) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }
}

impl fmt::Display for Jurisdiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.region {
            Some(r) => write!(f, "{}-{}", self.country, r),
            None => f.write_str(&self.country),
        }
    }
}

impl TryFrom<String> for Jurisdiction {
    type Error = DomainError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        parse_jurisdiction(&value)
    }
}

impl From<Jurisdiction> for String {
    fn from(j: Jurisdiction) -> Self {
        j.to_string()
    }
}

impl std::str::FromStr for Jurisdiction {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_jurisdiction(s)
    }
}

/// Parses `CC` or `CC-RR` against the supported table.
pub fn parse_jurisdiction(code: &str) -> Result<Jurisdiction, DomainError> {
    let unknown = || DomainError::UnknownJurisdiction(code.to_string());
    let (country, region) = match code.split_once('-') {
        Some((c, r)) => (c, Some(r)),
        None => (code, None),
    };
    let well_formed = country.len() == 2
        && country.chars().all(|c| c.is_ascii_uppercase())
        && region.is_none_or(|r| {
            r.len() == 2 && r.chars().all(|c| c.is_ascii_alphanumeric())
        });
    if !well_formed || !supported_table().contains_key(code) {
        return Err(unknown());
    }
    Ok(Jurisdiction {
        country: country.to_string(),
        region: region.map(str::to_string),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyRole {
    Client,
    Opposing,
    Related,
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Person,
    Organization,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub raw_name: String,
    pub role: PartyRole,
    #[serde(default)]
    pub entity_kind: EntityKind,
}

impl Party {
    pub fn new(raw_name: impl Into<String>, role: PartyRole) -> Self {
        Self {
            raw_name: raw_name.into(),
            role,
            entity_kind: EntityKind::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientProfile {
    pub client_id: String,
    pub parties: Vec<Party>,
    pub jurisdiction: Jurisdiction,
    #[serde(default)]
    pub contact: String,
}

impl ClientProfile {
    /// The single client-role party, if the profile is valid.
    pub fn client_party(&self) -> Option<&Party> {
        let mut it = self.parties.iter().filter(|p| p.role == PartyRole::Client);
        match (it.next(), it.next()) {
            (Some(p), None) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    MissingClientParty,
    MultipleClientParties,
    EmptyPartyName,
    EmptyClientId,
}

impl Violation {
    pub fn code(self) -> &'static str {
        match self {
            Violation::MissingClientParty => "MISSING_CLIENT_PARTY",
            Violation::MultipleClientParties => "MULTIPLE_CLIENT_PARTIES",
            Violation::EmptyPartyName => "EMPTY_PARTY_NAME",
            Violation::EmptyClientId => "EMPTY_CLIENT_ID",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the per-profile invariants. Client-id uniqueness is a store
/// concern and is enforced on registration.
pub fn validate_client_profile(profile: &ClientProfile) -> ValidationResult {
    let mut violations = Vec::new();
    if profile.client_id.trim().is_empty() {
        violations.push(Violation::EmptyClientId);
    }
    match profile
        .parties
        .iter()
        .filter(|p| p.role == PartyRole::Client)
        .count()
    {
        0 => violations.push(Violation::MissingClientParty),
        1 => {}
        _ => violations.push(Violation::MultipleClientParties),
    }
    if profile.parties.iter().any(|p| p.raw_name.trim().is_empty()) {
        violations.push(Violation::EmptyPartyName);
    }
    ValidationResult { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCategory {
    CaseLaw,
    Statute,
    Procedure,
    Mixed,
}

impl IssueCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCategory::CaseLaw => "case_law",
            IssueCategory::Statute => "statute",
            IssueCategory::Procedure => "procedure",
            IssueCategory::Mixed => "mixed",
        }
    }

    /// Collapses a matter's categories to the one used for routing.
    pub fn for_research(categories: &[IssueCategory]) -> IssueCategory {
        match categories {
            [single] => *single,
            [first, rest @ ..] if rest.iter().all(|c| c == first) => *first,
            _ => IssueCategory::Mixed,
        }
    }
}

/// Pipeline status of a matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SessionStatus {
    Registered,
    PrelimCleared,
    DocumentsCollected,
    InterviewInProgress,
    InterviewComplete,
    ComprehensiveCleared,
    Researching,
    Consolidating,
    Analyzed,
    ReportReady,
    TerminatedConflict,
    TerminatedError,
}

impl SessionStatus {
    pub const ALL: [SessionStatus; 12] = [
        SessionStatus::Registered,
        SessionStatus::PrelimCleared,
        SessionStatus::DocumentsCollected,
        SessionStatus::InterviewInProgress,
        SessionStatus::InterviewComplete,
        SessionStatus::ComprehensiveCleared,
        SessionStatus::Researching,
        SessionStatus::Consolidating,
        SessionStatus::Analyzed,
        SessionStatus::ReportReady,
        SessionStatus::TerminatedConflict,
        SessionStatus::TerminatedError,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            SessionStatus::ReportReady
                | SessionStatus::TerminatedConflict
                | SessionStatus::TerminatedError
        )
    }

    /// The legal transition relation. The only self-loop is
    /// `InterviewInProgress`; every other edge moves strictly forward.
    pub fn can_transition_to(self, next: SessionStatus) -> bool {
        use SessionStatus::*;
        if self.is_terminal() {
            return false;
        }
        if next == TerminatedError {
            return true;
        }
        matches!(
            (self, next),
            (Registered, PrelimCleared)
                | (Registered, TerminatedConflict)
                | (PrelimCleared, DocumentsCollected)
                | (DocumentsCollected, InterviewInProgress)
                | (DocumentsCollected, InterviewComplete)
                | (InterviewInProgress, InterviewInProgress)
                | (InterviewInProgress, InterviewComplete)
                | (InterviewComplete, ComprehensiveCleared)
                | (InterviewComplete, TerminatedConflict)
                | (ComprehensiveCleared, Researching)
                | (Researching, Consolidating)
                | (Consolidating, Analyzed)
                | (Analyzed, ReportReady)
        )
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matter {
    pub matter_id: String,
    pub client: ClientProfile,
    pub summary: String,
    pub issue_categories: Vec<IssueCategory>,
    #[serde(default)]
    pub research_terms: Vec<String>,
    pub documents: Vec<String>,
    pub status: SessionStatus,
}
