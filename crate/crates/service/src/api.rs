//! Route handlers and wire types.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use medchat_core::dialogue::{follow_up_question, Recorded};
use medchat_core::kg::{AttributeValue, KgError, Neighbor};
use medchat_core::ner::EntityCategory;
use medchat_core::patient::{PatientError, PatientProfile, Prediction};

use crate::App;

pub const DEFAULT_NEIGHBORS_K: usize = 10;
pub const DEFAULT_PREDICTIONS_K: usize = 5;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn unavailable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: &self.message })).into_response()
    }
}

impl From<PatientError> for ApiError {
    fn from(e: PatientError) -> Self {
        match e {
            PatientError::OutOfOrder { .. } | PatientError::EmptyPatientId => ApiError::unprocessable(e.to_string()),
            PatientError::UnknownPatient(_) | PatientError::SessionNotFound { .. } => ApiError::not_found(e.to_string()),
            other => ApiError::unavailable(other.to_string()),
        }
    }
}

impl From<KgError> for ApiError {
    fn from(e: KgError) -> Self {
        match e {
            KgError::UnknownNode(_) | KgError::UnknownDrug(_) => ApiError::not_found(e.to_string()),
            KgError::NotAnAttribute(_) | KgError::UndefinedConditional(_) => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatRequest {
    pub patient_id: String,
    pub message: String,
    #[serde(default)]
    pub client_timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartRequest {
    pub patient_id: String,
    #[serde(default)]
    pub client_timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReply {
    pub reply_text: String,
    pub recorded: Vec<Recorded>,
    pub session_id: u64,
    pub follow_up_pending: bool,
    /// Intent tag the message was classified as; absent for greetings
    /// opened with `/api/conversations/start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guideline_link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_sentences: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsReply {
    pub patient_id: String,
    pub k: usize,
    /// Some prediction scored at or above `alert_threshold`.
    pub alert: bool,
    pub alert_threshold: f64,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub cooccurrence_edges: usize,
    pub semantic_edges: usize,
    pub attribute_edges: usize,
    pub evidence_sentences: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub patients: usize,
    pub graph: GraphSummary,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn require_patient_id(id: &str) -> Result<(), ApiError> {
    if id.trim().is_empty() {
        Err(ApiError::unprocessable("patient_id must not be empty"))
    } else {
        Ok(())
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn chat(State(app): State<Arc<App>>, body: Bytes) -> ApiResult<ChatReply> {
    let req: ChatRequest = parse_body(&body)?;
    require_patient_id(&req.patient_id)?;
    if req.message.trim().is_empty() {
        return Err(ApiError::unprocessable("message must not be empty"));
    }
    blocking(move || app.chat(req)).await.map(Json)
}

async fn start_conversation(State(app): State<Arc<App>>, body: Bytes) -> ApiResult<ChatReply> {
    let req: StartRequest = parse_body(&body)?;
    require_patient_id(&req.patient_id)?;
    blocking(move || app.start(req)).await.map(Json)
}

async fn patient(State(app): State<Arc<App>>, Path(id): Path<String>) -> ApiResult<PatientProfile> {
    app.store
        .get(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown patient {id:?}")))
}

#[derive(Debug, Deserialize)]
struct PredictionsQuery {
    k: Option<usize>,
}

async fn predictions(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    Query(q): Query<PredictionsQuery>,
) -> ApiResult<PredictionsReply> {
    let k = q.k.unwrap_or(DEFAULT_PREDICTIONS_K);
    if k == 0 {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    blocking(move || app.predictions(&id, k)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct NeighborsQuery {
    node: Option<String>,
    k: Option<usize>,
    category: Option<String>,
}

async fn neighbors(State(app): State<Arc<App>>, Query(q): Query<NeighborsQuery>) -> ApiResult<Vec<Neighbor>> {
    let node = q.node.ok_or_else(|| ApiError::bad_request("missing query parameter node"))?;
    let k = q.k.unwrap_or(DEFAULT_NEIGHBORS_K);
    if k == 0 {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    let category = q
        .category
        .map(|c| c.parse::<EntityCategory>())
        .transpose()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(app.graph().graph.neighbors(node.trim(), k, category)?))
}

#[derive(Debug, Deserialize)]
struct AttributeQuery {
    drug: Option<String>,
    category: Option<String>,
}

async fn attribute(State(app): State<Arc<App>>, Query(q): Query<AttributeQuery>) -> ApiResult<Vec<AttributeValue>> {
    let drug = q.drug.ok_or_else(|| ApiError::bad_request("missing query parameter drug"))?;
    let category: EntityCategory = q
        .category
        .ok_or_else(|| ApiError::bad_request("missing query parameter category"))?
        .parse()
        .map_err(|e: medchat_core::ner::UnknownCategory| ApiError::bad_request(e.to_string()))?;
    Ok(Json(app.graph().graph.query_attribute(drug.trim(), category)?))
}

async fn reload(State(app): State<Arc<App>>) -> ApiResult<GraphSummary> {
    blocking(move || app.reload_graph().map_err(|e| ApiError::internal(e.to_string())))
        .await
        .map(Json)
}

async fn health(State(app): State<Arc<App>>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        patients: app.store.len(),
        graph: app.graph().summary(),
    })
}

pub fn routes() -> Router<Arc<App>> {
    Router::new()
        .route("/api/chat", post(chat))
        .route("/api/conversations/start", post(start_conversation))
        .route("/api/patients/{id}", get(patient))
        .route("/api/patients/{id}/predictions", get(predictions))
        .route("/api/graph/neighbors", get(neighbors))
        .route("/api/graph/attribute", get(attribute))
        .route("/api/admin/reload", post(reload))
        .route("/api/health", get(health))
}

impl App {
    fn chat(&self, req: ChatRequest) -> Result<ChatReply, ApiError> {
        let at = req.client_timestamp.unwrap_or_else(|| self.clock.now());
        let snapshot = self.graph();
        let mut tx = self.store.begin(&req.patient_id);
        let turn = self.bot.chat(
            &req.patient_id,
            &req.message,
            &mut tx,
            &snapshot.graph,
            snapshot.evidence.as_ref(),
            at,
        )?;
        if let Some(fault) = &turn.response.fault {
            return Err(ApiError::unavailable(format!("patient store unavailable: {fault}")));
        }
        self.store
            .commit(tx)
            .map_err(|e| ApiError::unavailable(format!("patient store unavailable: {e}")))?;
        Ok(ChatReply {
            reply_text: turn.response.text,
            recorded: turn.response.recorded,
            session_id: turn.session_id,
            follow_up_pending: turn.follow_up_pending,
            intent: Some(turn.parsed.intent.tag.to_string()),
            guideline_link: turn.response.guideline_link,
            evidence_sentences: turn.response.evidence_sentences,
        })
    }

    fn start(&self, req: StartRequest) -> Result<ChatReply, ApiError> {
        let at = req.client_timestamp.unwrap_or_else(|| self.clock.now());
        let mut tx = self.store.begin(&req.patient_id);
        let (response, session_id) = self.bot.start_conversation(&req.patient_id, &mut tx, at)?;
        let follow_up_pending = tx.profile().and_then(follow_up_question).is_some();
        self.store
            .commit(tx)
            .map_err(|e| ApiError::unavailable(format!("patient store unavailable: {e}")))?;
        Ok(ChatReply {
            reply_text: response.text,
            recorded: Vec::new(),
            session_id,
            follow_up_pending,
            intent: None,
            guideline_link: None,
            evidence_sentences: None,
        })
    }

    fn predictions(&self, patient_id: &str, k: usize) -> Result<PredictionsReply, ApiError> {
        use medchat_core::patient::{predict_next_symptoms, trajectory};
        let target = self
            .store
            .get(patient_id)
            .ok_or_else(|| ApiError::not_found(format!("unknown patient {patient_id:?}")))?;
        let snapshot = self.graph();
        let config = self.config.patient();
        let cohort: Vec<_> = self
            .store
            .profiles()
            .iter()
            .filter(|p| p.patient_id != patient_id)
            .filter_map(|p| trajectory(p, &snapshot.graph, &config))
            .collect();
        let predictions = trajectory(&target, &snapshot.graph, &config)
            .map(|t| predict_next_symptoms(&t, &cohort, &snapshot.graph, k, &config))
            .unwrap_or_default();
        let alert_threshold = self.config.alert_threshold;
        Ok(PredictionsReply {
            patient_id: patient_id.to_string(),
            k,
            alert: predictions.iter().any(|p| p.score >= alert_threshold),
            alert_threshold,
            predictions,
        })
    }
}
