//! JSON-over-HTTP front of the orchestrator. Matter-scoped routes need an
//! `Authorization: Bearer <token>` header carrying the token returned by
//! `POST /matters`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::Deserialize;

use super::{NewClient, NewMatter, Orchestrator, OrchestratorError, Upload};
use crate::conflict::CheckStage;
use crate::report::ReportFormat;

pub fn router(orch: Arc<Orchestrator>) -> Router {
    Router::new()
        .route("/clients", post(create_client))
        .route("/matters", post(create_matter))
        .route("/matters/:id", get(view))
        .route("/matters/:id/conflict-check", post(conflict_check))
        .route("/matters/:id/documents", post(documents))
        .route("/matters/:id/interview/next", get(interview_next))
        .route("/matters/:id/interview/answer", post(interview_answer))
        .route("/matters/:id/interview/finish", post(interview_finish))
        .route("/matters/:id/research", post(research))
        .route("/matters/:id/analysis", post(analysis))
        .route("/matters/:id/report", get(report))
        .with_state(orch)
}

/// Binds and serves until the process is stopped.
pub async fn serve(orch: Arc<Orchestrator>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(orch)).await
}

pub struct ApiError(OrchestratorError);

impl From<OrchestratorError> for ApiError {
    fn from(e: OrchestratorError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = serde_json::json!({ "code": self.0.code(), "message": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(OrchestratorError::Validation(msg.into()))
}

fn bearer(headers: &HeaderMap) -> ApiResult<String> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or(ApiError(OrchestratorError::Unauthorized))
}

/// Parses the body ourselves so malformed JSON comes back as a
/// `Validation` error in the usual shape.
fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| bad_request(format!("invalid request body: {e}")))
}

async fn create_client(
    State(o): State<Arc<Orchestrator>>,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: NewClient = parse(&body)?;
    Ok((StatusCode::CREATED, Json(o.register_client(req)?)))
}

async fn create_matter(
    State(o): State<Arc<Orchestrator>>,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: NewMatter = parse(&body)?;
    Ok((StatusCode::CREATED, Json(o.create_matter(req)?)))
}

async fn view(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(o.view(&bearer(&headers)?, &id).await?))
}

#[derive(Deserialize)]
struct StageParam {
    stage: Option<String>,
}

async fn conflict_check(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    Query(q): Query<StageParam>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    let token = bearer(&headers)?;
    let stage = match q.stage.as_deref() {
        Some("preliminary") => CheckStage::Preliminary,
        Some("comprehensive") => CheckStage::Comprehensive,
        Some(other) => return Err(bad_request(format!("unknown stage `{other}`"))),
        None => return Err(bad_request("stage is required")),
    };
    Ok(Json(o.conflict_check(&token, &id, stage).await?))
}

#[derive(Deserialize)]
struct DocumentsBody {
    documents: Vec<UploadBody>,
}

#[derive(Deserialize)]
struct UploadBody {
    filename: String,
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    content_base64: Option<String>,
}

async fn documents(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let token = bearer(&headers)?;
    let req: DocumentsBody = parse(&body)?;
    let mut uploads = Vec::with_capacity(req.documents.len());
    for d in req.documents {
        let bytes = match (d.content, d.content_base64) {
            (Some(text), None) => text.into_bytes(),
            (None, Some(b64)) => base64::engine::general_purpose::STANDARD
                .decode(b64.trim())
                .map_err(|e| bad_request(format!("{}: bad base64: {e}", d.filename)))?,
            _ => {
                return Err(bad_request(format!(
                    "{}: give exactly one of content or content_base64",
                    d.filename
                )))
            }
        };
        uploads.push(Upload {
            filename: d.filename,
            bytes,
        });
    }
    Ok(Json(o.upload_documents(&token, &id, uploads).await?))
}

async fn interview_next(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(o.next_question(&bearer(&headers)?, &id).await?))
}

#[derive(Deserialize)]
struct AnswerBody {
    question_id: String,
    answer: String,
}

async fn interview_answer(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let token = bearer(&headers)?;
    let req: AnswerBody = parse(&body)?;
    Ok(Json(o.answer(&token, &id, &req.question_id, &req.answer).await?))
}

async fn interview_finish(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(o.finish_interview(&bearer(&headers)?, &id).await?))
}

async fn research(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(o.research(&bearer(&headers)?, &id).await?))
}

async fn analysis(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(o.analyze(&bearer(&headers)?, &id).await?))
}

#[derive(Deserialize)]
struct FormatParam {
    format: Option<String>,
}

async fn report(
    State(o): State<Arc<Orchestrator>>,
    Path(id): Path<String>,
    Query(q): Query<FormatParam>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    let token = bearer(&headers)?;
    let format: ReportFormat = q
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(|e: crate::report::ReportError| bad_request(e.to_string()))?;
    let bytes = o.report(&token, &id, format).await?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], bytes))
}
