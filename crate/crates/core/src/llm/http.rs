//! JSON-over-HTTP adapter for a hosted model behind a thin gateway.
//!
//! Requests are `POST {endpoint}/generate-questions` with
//! `{"model", "context"}`, `POST {endpoint}/analyze` with
//! `{"model", "context", "authorities"}` and, for the verifier,
//! `POST {endpoint}/verify-citation` with `{"model", "hint", "authority"}`.
//! Responses are a `QuestionBatch`, a `StructuredAnalysis` and
//! `{"confirmed": bool}` respectively. The bearer token is read from the
//! environment variable named in the config.

use std::time::Duration;

use async_trait::async_trait;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CitationVerifier, LlmAdapter, LlmContext, LlmError, QuestionBatch, StructuredAnalysis};
use crate::consolidation::Authority;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveAdapterConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    60_000
}

#[derive(Debug, Clone)]
struct Client {
    http: reqwest::Client,
    endpoint: String,
    model: String,
    token: String,
}

impl Client {
    fn new(cfg: &LiveAdapterConfig) -> Result<Self, LlmError> {
        let token = std::env::var(&cfg.api_key_env).map_err(|_| {
            LlmError::AdapterUnavailable(format!("{} is not set", cfg.api_key_env))
        })?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| LlmError::AdapterUnavailable(e.to_string()))?;
        Ok(Self {
            http,
            endpoint: cfg.endpoint.trim_end_matches('/').to_string(),
            model: cfg.model.clone(),
            token,
        })
    }

    async fn post<T: DeserializeOwned>(&self, path: &str, body: serde_json::Value) -> Result<T, LlmError> {
        let resp = self
            .http
            .post(format!("{}/{path}", self.endpoint))
            .bearer_auth(&self.token)
            .json(&body)
            .send()
            .await
            .map_err(|e| LlmError::AdapterUnavailable(e.without_url().to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(LlmError::AdapterUnavailable(format!("gateway answered {status}")));
        }
        if !status.is_success() {
            return Err(LlmError::MalformedResponse(format!("gateway answered {status}")));
        }
        let text = resp
            .text()
            .await
            .map_err(|e| LlmError::AdapterUnavailable(e.without_url().to_string()))?;
        serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct HttpLlmAdapter {
    client: Client,
}

impl HttpLlmAdapter {
    pub fn new(cfg: &LiveAdapterConfig) -> Result<Self, LlmError> {
        Ok(Self {
            client: Client::new(cfg)?,
        })
    }
}

#[async_trait]
impl LlmAdapter for HttpLlmAdapter {
    async fn generate_questions(&self, ctx: &LlmContext) -> Result<QuestionBatch, LlmError> {
        let batch: QuestionBatch = self
            .client
            .post("generate-questions", json!({"model": self.client.model, "context": ctx}))
            .await?;
        batch.validate()?;
        Ok(batch)
    }

    async fn analyze_matter(
        &self,
        ctx: &LlmContext,
        authorities: &[Authority],
    ) -> Result<StructuredAnalysis, LlmError> {
        let analysis: StructuredAnalysis = self
            .client
            .post(
                "analyze",
                json!({"model": self.client.model, "context": ctx, "authorities": authorities}),
            )
            .await?;
        analysis.validate()?;
        Ok(analysis)
    }
}

#[derive(Debug, Clone)]
pub struct HttpVerifier {
    client: Client,
}

impl HttpVerifier {
    pub fn new(cfg: &LiveAdapterConfig) -> Result<Self, LlmError> {
        Ok(Self {
            client: Client::new(cfg)?,
        })
    }
}

#[derive(Deserialize)]
struct Confirmation {
    confirmed: bool,
}

#[async_trait]
impl CitationVerifier for HttpVerifier {
    async fn confirm(&self, hint: &str, authority: &Authority) -> Result<bool, LlmError> {
        let c: Confirmation = self
            .client
            .post(
                "verify-citation",
                json!({"model": self.client.model, "hint": hint, "authority": authority}),
            )
            .await?;
        Ok(c.confirmed)
    }
}
