//! Live CanLII connector. The public API offers case browsing per database
//! but no full-text search, so decisions are listed by date window and
//! filtered locally on their titles.

use std::collections::HashSet;
use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;

use crate::research::{
    parse_provider_query, ConnectorError, ParsedQuery, ProviderId, ProviderQuery, RawResult,
    SearchConnector,
};
use crate::text::search_tokens;

pub const CANLII_API_KEY_ENV: &str = "CANLII_API_KEY";
const DEFAULT_BASE: &str = "https://api.canlii.org/v1";

#[derive(Debug, Clone)]
pub struct CanliiHttpConnector {
    client: reqwest::Client,
    base_url: String,
    api_key: String,
    databases: Vec<String>,
}

impl CanliiHttpConnector {
    /// Reads the key from the environment.
    pub fn from_env(databases: Vec<String>) -> Result<Self, ConnectorError> {
        let key = std::env::var(CANLII_API_KEY_ENV).map_err(|_| {
            ConnectorError::Unavailable(format!("{CANLII_API_KEY_ENV} is not set"))
        })?;
        Ok(Self::new(DEFAULT_BASE, key, databases))
    }

    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>, databases: Vec<String>) -> Self {
        Self {
            client: reqwest::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("static client configuration"),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            databases,
        }
    }

    async fn browse(&self, db: &str, q: &ParsedQuery, max: usize) -> Result<String, ConnectorError> {
        let mut params = vec![
            ("offset", "0".to_string()),
            ("resultCount", max.clamp(1, 10_000).to_string()),
            ("api_key", self.api_key.clone()),
        ];
        if let Some(r) = q.date_range {
            params.push(("decisionDateAfter", r.from.to_string()));
            params.push(("decisionDateBefore", r.to.to_string()));
        }
        let url = format!("{}/caseBrowse/en/{db}/", self.base_url);
        let resp = self
            .client
            .get(url)
            .query(&params)
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    ConnectorError::Timeout(e.without_url().to_string())
                } else {
                    ConnectorError::Unavailable(e.without_url().to_string())
                }
            })?;
        let status = resp.status();
        if status.is_client_error() {
            return Err(ConnectorError::BadQuery(format!("CanLII answered {status}")));
        }
        if !status.is_success() {
            return Err(ConnectorError::Unavailable(format!("CanLII answered {status}")));
        }
        resp.text()
            .await
            .map_err(|e| ConnectorError::Unavailable(e.without_url().to_string()))
    }
}

#[async_trait]
impl SearchConnector for CanliiHttpConnector {
    fn provider_id(&self) -> ProviderId {
        ProviderId::Canlii
    }

    async fn search(&self, query: &ProviderQuery) -> Result<Vec<RawResult>, ConnectorError> {
        let parsed =
            parse_provider_query(query).map_err(|e| ConnectorError::BadQuery(e.to_string()))?;
        let mut out = Vec::new();
        for db in &self.databases {
            let body = self.browse(db, &parsed, query.max_results).await?;
            out.extend(parse_case_browse(&body, &parsed)?);
        }
        let mut seen = HashSet::new();
        out.retain(|r: &RawResult| seen.insert(r.doc_id.clone()));
        out.truncate(query.max_results);
        Ok(out)
    }
}

#[derive(Deserialize)]
struct BrowseResponse {
    cases: Vec<BrowseCase>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct BrowseCase {
    database_id: String,
    case_id: serde_json::Value,
    title: String,
    citation: String,
}

/// Turns a `caseBrowse` response into results whose titles contain every
/// query token.
pub(crate) fn parse_case_browse(body: &str, q: &ParsedQuery) -> Result<Vec<RawResult>, ConnectorError> {
    let resp: BrowseResponse = serde_json::from_str(body)
        .map_err(|e| ConnectorError::Unavailable(format!("unexpected CanLII payload: {e}")))?;
    let wanted: Vec<String> = q.terms.iter().flat_map(|t| search_tokens(t).collect::<Vec<_>>()).collect();
    Ok(resp
        .cases
        .into_iter()
        .filter(|c| {
            let have: HashSet<String> = search_tokens(&c.title).collect();
            wanted.iter().all(|w| have.contains(w))
        })
        .map(|c| {
            let case_id = match &c.case_id {
                serde_json::Value::Object(m) => m
                    .get("en")
                    .or_else(|| m.values().next())
                    .and_then(|v| v.as_str())
                    .unwrap_or_default()
                    .to_string(),
                serde_json::Value::String(s) => s.clone(),
                _ => String::new(),
            };
            RawResult {
                provider_id: ProviderId::Canlii,
                doc_id: format!("{}/{}", c.database_id, case_id),
                title: c.title,
                citation_string: c.citation,
                court: Some(c.database_id),
                jurisdiction: q.jurisdiction.as_ref().map(|j| j.code()),
                date: None,
                headnote: None,
                score_provider: None,
                url: None,
            }
        })
        .collect())
}
