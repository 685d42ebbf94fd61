//! HTTP routes. Request and response bodies are JSON except for raster images
//! and the optional plain-text stress report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use breaktimes_core::{
    compute_score, frequency_hz, message_for, BreakLevel, Catalog, Cell, ColorIndex, CompletionRecord,
    FeedbackCategory, FeedbackResponse, Phase, Questionnaire, Scenario, Score, SessionEvent, SessionState,
    StressResponse, SurveyPhase,
};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::artwork::PPM_CONTENT_TYPE;
use crate::clock::Clock;
use crate::error::ServiceError;
use crate::store::SessionStore;
use crate::surveys::SurveyStore;

#[derive(Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub scenario_dir: PathBuf,
    pub store: Arc<SessionStore>,
    pub surveys: Arc<SurveyStore>,
    pub questionnaire: Arc<Questionnaire>,
    pub clock: Arc<dyn Clock>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/scenarios", get(list_scenarios))
        .route("/scenarios/random", get(random_scenario))
        .route("/scenarios/{id}", get(get_scenario))
        .route("/scenarios/{id}/reference", get(reference_image))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/close", post(close_session))
        .route("/sessions/{id}/replay", get(get_replay))
        .route("/sessions/{id}/artwork", get(get_artwork))
        .route("/surveys/stress", post(submit_stress))
        .route("/surveys/stress/questionnaire", get(questionnaire))
        .route("/surveys/feedback", post(submit_feedback))
        .route("/reports/stress", get(stress_report))
        .route("/reports/feedback", get(feedback_report))
        .with_state(state)
}

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self.0.code() {
            "unknown_session" | "unknown_scenario" => StatusCode::NOT_FOUND,
            "wrong_phase" | "session_expired" | "not_completed" | "duplicate_respondent" | "empty_cohort" => {
                StatusCode::CONFLICT
            }
            "out_of_mask" | "invalid_color" | "malformed_response" | "out_of_range" | "inconsistent_record" => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            "malformed_request" | "invalid_level" => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let body = json!({ "error": { "code": self.0.code(), "message": self.0.to_string() } });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Store calls touch the disk; keep them off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::storage("running a storage task", std::io::Error::other(e)))?
        .map_err(ApiError)
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::MalformedRequest(e.to_string()))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Serialize)]
struct PaletteSwatch {
    color_index: u8,
    rgb: String,
    note: u8,
    frequency_hz: f64,
}

#[derive(Debug, Serialize)]
struct ScenarioView {
    id: String,
    title: String,
    level: BreakLevel,
    budget_seconds: u64,
    width: u16,
    height: u16,
    mask: Vec<Cell>,
    palette: Vec<PaletteSwatch>,
    reference_image: String,
}

impl From<&Scenario> for ScenarioView {
    fn from(s: &Scenario) -> Self {
        Self {
            id: s.id.clone(),
            title: s.title.clone(),
            level: s.level,
            budget_seconds: s.level.budget_seconds(),
            width: s.width,
            height: s.height,
            mask: s.mask.iter().copied().collect(),
            palette: s
                .palette
                .entries()
                .iter()
                .enumerate()
                .map(|(i, e)| PaletteSwatch {
                    color_index: i as u8,
                    rgb: e.rgb.to_string(),
                    note: e.note,
                    frequency_hz: frequency_hz(e.note).unwrap_or_default(),
                })
                .collect(),
            reference_image: format!("/scenarios/{}/reference", s.id),
        }
    }
}

#[derive(Debug, Deserialize)]
struct LevelQuery {
    level: Option<String>,
}

async fn list_scenarios(State(app): State<AppState>, Query(q): Query<LevelQuery>) -> ApiResult<Json<Vec<ScenarioView>>> {
    let views = match q.level {
        Some(level) => {
            let level: BreakLevel = level.parse().map_err(ServiceError::InvalidLevel)?;
            app.catalog.select_by_level(level).into_iter().map(ScenarioView::from).collect()
        }
        None => app.catalog.list_all().iter().map(ScenarioView::from).collect(),
    };
    Ok(Json(views))
}

#[derive(Debug, Deserialize)]
struct SeedQuery {
    seed: Option<u64>,
}

async fn random_scenario(State(app): State<AppState>, Query(q): Query<SeedQuery>) -> Json<serde_json::Value> {
    let seed = q.seed.unwrap_or_else(|| app.clock.now_ms());
    let scenario = ScenarioView::from(app.catalog.select_random(seed));
    Json(json!({ "seed": seed, "scenario": scenario }))
}

async fn get_scenario(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ScenarioView>> {
    let s = app.catalog.get(&id).ok_or(ServiceError::UnknownScenario(id))?;
    Ok(Json(ScenarioView::from(s)))
}

async fn reference_image(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = app.catalog.get(&id).ok_or_else(|| ServiceError::UnknownScenario(id.clone()))?;
    let path = app.scenario_dir.join(&s.reference_image);
    let content_type = match path.extension().and_then(|e| e.to_str()) {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("ppm") => PPM_CONTENT_TYPE,
        _ => "application/octet-stream",
    };
    let bytes = blocking(move || std::fs::read(&path).map_err(|e| ServiceError::storage("reading a reference image", e)))
        .await?;
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    scenario_id: String,
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSession = parse_body(&body)?;
    let store = app.store.clone();
    let summary = blocking(move || store.create(&req.scenario_id)).await?;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

#[derive(Debug, Serialize)]
struct PaintedCell {
    cell: Cell,
    color: ColorIndex,
}

#[derive(Debug, Serialize)]
struct SessionView {
    session_id: String,
    scenario_id: String,
    phase: Phase,
    started_at_ms: u64,
    deadline_ms: u64,
    remaining_ms: u64,
    reference_visible: bool,
    alert_fired: bool,
    actions_logged: usize,
    painted: Vec<PaintedCell>,
    completion: Option<CompletionRecord>,
    score: Option<Score>,
    message: Option<&'static str>,
    mood: Option<String>,
}

impl SessionView {
    fn of(s: &SessionState, now_ms: u64) -> Self {
        let score = s.completion().and_then(|c| compute_score(c, s.scenario()).ok());
        Self {
            session_id: s.session_id().to_owned(),
            scenario_id: s.scenario_id().to_owned(),
            phase: s.phase(),
            started_at_ms: s.started_at_ms(),
            deadline_ms: s.deadline_ms(),
            remaining_ms: s.remaining_ms(now_ms),
            reference_visible: s.reference_visible(),
            alert_fired: s.alert_fired(),
            actions_logged: s.log().len(),
            painted: s.grid().painted().map(|(cell, color)| PaintedCell { cell, color }).collect(),
            completion: s.completion().copied(),
            message: score.as_ref().map(message_for),
            score,
            mood: s.mood().map(str::to_owned),
        }
    }
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let now = app.clock.now_ms();
    let view = app.store.with_session(&id, |s| SessionView::of(s, now))?;
    Ok(Json(view))
}

async fn post_event(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let event: SessionEvent = parse_body(&body)?;
    let store = app.store.clone();
    let ack = blocking(move || store.record_event(&id, event)).await?;
    Ok(Json(ack).into_response())
}

#[derive(Debug, Deserialize)]
struct CloseRequest {
    #[serde(default)]
    mood: String,
}

async fn close_session(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: CloseRequest = if body.is_empty() { CloseRequest { mood: String::new() } } else { parse_body(&body)? };
    let store = app.store.clone();
    let ack = blocking(move || store.close(&id, &req.mood)).await?;
    Ok(Json(ack).into_response())
}

async fn get_replay(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = app.store.clone();
    let script = blocking(move || store.replay(&id)).await?;
    Ok(Json(script).into_response())
}

async fn get_artwork(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = app.store.clone();
    let (art, _) = blocking(move || store.export_artwork(&id)).await?;
    Ok(([(header::CONTENT_TYPE, PPM_CONTENT_TYPE)], art.to_ppm()).into_response())
}

#[derive(Debug, Deserialize)]
struct StressSubmission {
    respondent_id: String,
    phase: SurveyPhase,
    items: Vec<i64>,
    #[serde(default)]
    taken_at: Option<DateTime<Utc>>,
}

fn malformed(reason: impl Into<String>) -> ServiceError {
    ServiceError::Assessment(breaktimes_core::AssessmentError::MalformedResponse(reason.into()))
}

async fn submit_stress(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let sub: StressSubmission = serde_json::from_slice(&body).map_err(|e| malformed(e.to_string()))?;
    let items = sub
        .items
        .iter()
        .map(|&v| u8::try_from(v).map_err(|_| malformed(format!("answer {v} outside 0..=3"))))
        .collect::<Result<Vec<u8>, _>>()?;
    let response = StressResponse {
        respondent_id: sub.respondent_id,
        phase: sub.phase,
        items,
        taken_at: sub.taken_at.unwrap_or_else(Utc::now),
    };
    let surveys = app.surveys.clone();
    let result = blocking(move || surveys.submit_stress(response)).await?;
    Ok((StatusCode::CREATED, Json(result)).into_response())
}

#[derive(Debug, Deserialize)]
struct FeedbackSubmission {
    respondent_id: String,
    ratings: BTreeMap<String, i64>,
    #[serde(default)]
    comment: Option<String>,
}

async fn submit_feedback(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let sub: FeedbackSubmission = serde_json::from_slice(&body).map_err(|e| malformed(e.to_string()))?;
    let mut ratings = BTreeMap::new();
    for (name, value) in sub.ratings {
        let category: FeedbackCategory = serde_json::from_value(json!(name))
            .map_err(|_| malformed(format!("unknown feedback category {name:?}")))?;
        let value = u8::try_from(value).map_err(|_| malformed(format!("{name} rating {value} outside 1..=5")))?;
        ratings.insert(category, value);
    }
    let response = FeedbackResponse { respondent_id: sub.respondent_id, ratings, comment: sub.comment };
    let surveys = app.surveys.clone();
    blocking(move || surveys.submit_feedback(response)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "stored": true })).into_response()).into_response())
}

async fn questionnaire(State(app): State<AppState>) -> Json<Questionnaire> {
    Json((*app.questionnaire).clone())
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn stress_report(State(app): State<AppState>, Query(q): Query<FormatQuery>) -> ApiResult<Response> {
    let report = app.surveys.cohort_report()?;
    Ok(match q.format.as_deref() {
        Some("text") => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], report.render_table()).into_response(),
        _ => Json(report).into_response(),
    })
}

async fn feedback_report(State(app): State<AppState>) -> Json<breaktimes_core::FeedbackSummary> {
    Json(app.surveys.feedback_summary())
}
