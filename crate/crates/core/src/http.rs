//! JSON-over-HTTP binding of [`Platform`], with a server-sent event stream
//! per session. Facilitator-only routes require `Authorization: Bearer`.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast::error::RecvError;

use crate::coding::{AnnotateRequest, GroupRequest, StageFilter};
use crate::consensus::{LikertRequest, RankingRequest, REPORT_BALLOT_K};
use crate::error::Error;
use crate::ids::{AnnotationId, ContextId, InteractionId, ParticipantId, SessionId};
use crate::llm::ChatRequest;
use crate::model::{NewContext, Participant, ProgressFlag, Role, Session, Stage};
use crate::session::{AttributeRequest, ExportDocument, ExportFormat, Platform};

#[derive(Clone)]
struct AppState {
    platform: Arc<Platform>,
    token: Arc<str>,
}

/// Error body: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: serde_json::Value,
}

pub fn status_of(err: &Error) -> StatusCode {
    use Error::*;
    match err {
        NotFound { .. } => StatusCode::NOT_FOUND,
        Unauthorized => StatusCode::UNAUTHORIZED,
        NotFacilitator(_) => StatusCode::FORBIDDEN,
        Conflict { .. }
        | WrongStage { .. }
        | IllegalTransition { .. }
        | PreconditionFailed { .. }
        | AtFinalSegment
        | WrongSegment { .. }
        | InvariantViolation(_)
        | Busy(_)
        | PendingReply(_)
        | NoPendingReply(_) => StatusCode::CONFLICT,
        NoBallots(_) | InsufficientOverlap(_) | NoSegmentFiveData | MissingDefinitions(_)
        | NoAnnotations => StatusCode::UNPROCESSABLE_ENTITY,
        ProviderUnavailable(_) => StatusCode::BAD_GATEWAY,
        ProviderTimeout => StatusCode::GATEWAY_TIMEOUT,
        Io(_) | Csv(_) | Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let body = ErrorBody {
            code: self.0.code().to_owned(),
            message: self.0.to_string(),
            detail: self.0.detail(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes)
        .map_err(|e| Error::Validation(format!("malformed request body: {e}")).into())
}

fn query<T: DeserializeOwned>(q: &BTreeMap<String, String>) -> ApiResult<T> {
    let v = serde_json::to_value(q).expect("string map");
    serde_json::from_value(v)
        .map_err(|e| Error::Validation(format!("malformed query: {e}")).into())
}

impl AppState {
    fn facilitator(&self, headers: &HeaderMap) -> ApiResult<()> {
        let presented = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        match presented {
            Some(t) if t.as_bytes() == self.token.as_bytes() => Ok(()),
            _ => Err(Error::Unauthorized.into()),
        }
    }
}

pub fn router(platform: Arc<Platform>, facilitator_token: &str) -> Router {
    let state = AppState {
        platform,
        token: facilitator_token.into(),
    };
    Router::new()
        .route("/contexts", post(create_context))
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/participants", post(add_participant))
        .route("/sessions/{id}/participants/{pid}/flags", post(mark_progress))
        .route("/sessions/{id}/advance", post(advance_stage))
        .route("/sessions/{id}/segment/advance", post(advance_segment))
        .route("/sessions/{id}/chat", post(chat))
        .route("/sessions/{id}/interactions/{iid}/retry", post(retry))
        .route("/sessions/{id}/baseline", post(baseline))
        .route("/sessions/{id}/workload/{pid}", get(workload))
        .route("/sessions/{id}/annotations", post(annotate))
        .route("/sessions/{id}/annotations/{aid}", delete(retract))
        .route("/sessions/{id}/groups", post(group))
        .route("/sessions/{id}/words", get(words))
        .route("/sessions/{id}/affinity", get(affinity))
        .route("/sessions/{id}/affinity/neighbors", get(neighbors))
        .route("/sessions/{id}/attributes", post(attribute))
        .route("/sessions/{id}/rankings", post(ranking))
        .route("/sessions/{id}/likert", post(likert))
        .route("/sessions/{id}/borda", get(borda))
        .route("/sessions/{id}/shift", get(shift))
        .route("/sessions/{id}/packet/{pid}", get(packet))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

async fn create_context(
    State(s): State<AppState>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let spec: NewContext = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(s.platform.create_context(spec)?)))
}

#[derive(Deserialize)]
struct CreateSession {
    context_id: ContextId,
}

async fn create_session(
    State(s): State<AppState>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: CreateSession = body(&bytes)?;
    Ok((
        StatusCode::CREATED,
        Json(s.platform.create_session(&req.context_id)?),
    ))
}

async fn import_session(
    State(s): State<AppState>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Validation("export must be UTF-8".into()))?;
    let session = s.platform.import(text).map_err(|e| match e {
        Error::Json(e) => Error::Validation(format!("malformed export: {e}")),
        other => other,
    })?;
    Ok((StatusCode::CREATED, Json(session)))
}

#[derive(Serialize)]
struct SessionView {
    session: Session,
    participants: Vec<Participant>,
    /// Advisory minutes per discussion segment.
    segment_minutes: BTreeMap<u8, u32>,
}

async fn get_session(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
) -> ApiResult<Json<SessionView>> {
    let st = s.platform.snapshot(&id)?;
    Ok(Json(SessionView {
        session: st.session.clone(),
        participants: st.list_participants().to_vec(),
        segment_minutes: s.platform.segment_durations().clone(),
    }))
}

async fn events(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let (sync, rx) = s.platform.subscribe(&id)?;
    let first = Event::default()
        .event("sync")
        .json_data(&sync)
        .expect("event serializes");
    let live = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(ev) => {
                    let name = match ev.kind {
                        crate::session::SessionEventKind::Sync => "sync",
                        crate::session::SessionEventKind::StageChanged => "stage",
                        crate::session::SessionEventKind::SegmentChanged => "segment",
                    };
                    let e = Event::default()
                        .event(name)
                        .id(ev.seq.to_string())
                        .json_data(&ev)
                        .expect("event serializes");
                    return Some((Ok(e), rx));
                }
                // The client fell behind; tell it to refetch.
                Err(RecvError::Lagged(_)) => {
                    return Some((Ok(Event::default().event("lagged").data("refetch")), rx));
                }
                Err(RecvError::Closed) => return None,
            }
        }
    });
    let stream = futures::StreamExt::chain(futures::stream::once(async { Ok(first) }), live);
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct AddParticipant {
    pseudonym: String,
    #[serde(default = "participant_role")]
    role: Role,
}

fn participant_role() -> Role {
    Role::Participant
}

async fn add_participant(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: AddParticipant = body(&bytes)?;
    Ok((
        StatusCode::CREATED,
        Json(s.platform.add_participant(&id, &req.pseudonym, req.role)?),
    ))
}

#[derive(Deserialize)]
struct MarkProgress {
    flag: ProgressFlag,
}

async fn mark_progress(
    State(s): State<AppState>,
    Path((id, pid)): Path<(SessionId, ParticipantId)>,
    bytes: Bytes,
) -> ApiResult<Json<Participant>> {
    let req: MarkProgress = body(&bytes)?;
    Ok(Json(s.platform.mark_progress(&id, &pid, req.flag)?))
}

#[derive(Deserialize)]
struct AdvanceStage {
    actor: ParticipantId,
    target: Stage,
    #[serde(default)]
    forced: bool,
}

async fn advance_stage(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: AdvanceStage = body(&bytes)?;
    Ok(Json(s.platform.advance_stage(
        &id,
        &req.actor,
        req.target,
        req.forced,
    )?))
}

#[derive(Deserialize)]
struct AdvanceSegment {
    actor: ParticipantId,
    #[serde(default)]
    forced: bool,
}

async fn advance_segment(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: AdvanceSegment = body(&bytes)?;
    Ok(Json(s.platform.advance_segment(&id, &req.actor, req.forced)?))
}

async fn chat(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: ChatRequest = body(&bytes)?;
    Ok(Json(s.platform.send_message(&id, req).await?))
}

#[derive(Deserialize)]
struct Retry {
    participant_id: ParticipantId,
}

async fn retry(
    State(s): State<AppState>,
    Path((id, iid)): Path<(SessionId, InteractionId)>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: Retry = body(&bytes)?;
    Ok(Json(
        s.platform.retry_reply(&id, &req.participant_id, &iid).await?,
    ))
}

#[derive(Deserialize)]
struct Baseline {
    transcripts: Vec<String>,
    #[serde(default)]
    author_id: Option<ParticipantId>,
}

#[derive(Serialize)]
struct BaselineLoaded {
    interaction_ids: Vec<InteractionId>,
}

async fn baseline(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: Baseline = body(&bytes)?;
    let interaction_ids = s
        .platform
        .load_baseline(&id, &req.transcripts, req.author_id)?;
    Ok((StatusCode::CREATED, Json(BaselineLoaded { interaction_ids })))
}

async fn workload(
    State(s): State<AppState>,
    Path((id, pid)): Path<(SessionId, ParticipantId)>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.platform.workload(&id, &pid)?))
}

async fn annotate(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: AnnotateRequest = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(s.platform.annotate(&id, req)?)))
}

#[derive(Deserialize)]
struct Retract {
    participant_id: ParticipantId,
}

async fn retract(
    State(s): State<AppState>,
    Path((id, aid)): Path<(SessionId, AnnotationId)>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let req: Retract = query(&q)?;
    Ok(Json(
        s.platform
            .retract_annotation(&id, &req.participant_id, &aid)?,
    ))
}

async fn group(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: GroupRequest = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(s.platform.group_codes(&id, req)?)))
}

#[derive(Deserialize)]
struct Words {
    #[serde(default)]
    stage: StageFilter,
}

/// Full label statistics, including source annotation ids; facilitator only.
async fn words(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    s.facilitator(&headers)?;
    let req: Words = query(&q)?;
    Ok(Json(s.platform.word_frequencies(&id, req.stage)?))
}

async fn affinity(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.platform.affinity_layout(&id).await?))
}

#[derive(Deserialize)]
struct Neighbors {
    label: String,
    #[serde(default)]
    k: Option<String>,
}

const DEFAULT_NEIGHBORS: usize = 5;

async fn neighbors(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let req: Neighbors = query(&q)?;
    // Without an explicit k, small boards return every other label.
    let k: usize = match &req.k {
        Some(k) => k
            .parse()
            .map_err(|_| Error::Validation(format!("k must be a non-negative integer, got {k:?}")))?,
        None => {
            let board = s.platform.affinity_layout(&id).await?;
            DEFAULT_NEIGHBORS.min(board.points.len().saturating_sub(1))
        }
    };
    Ok(Json(s.platform.nearest_neighbors(&id, &req.label, k).await?))
}

async fn attribute(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: AttributeRequest = body(&bytes)?;
    Ok(Json(s.platform.put_attribute(&id, req)?))
}

async fn ranking(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: RankingRequest = body(&bytes)?;
    Ok(Json(s.platform.submit_ranking(&id, req)?))
}

async fn likert(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    bytes: Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: LikertRequest = body(&bytes)?;
    Ok(Json(s.platform.submit_likert(&id, req)?))
}

fn parse_num<T: std::str::FromStr>(q: &BTreeMap<String, String>, key: &str, default: T) -> ApiResult<T> {
    match q.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Validation(format!("bad `{key}`: {v:?}")).into()),
    }
}

async fn borda(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let segment: u8 = parse_num(&q, "segment", 5)?;
    let k: usize = parse_num(&q, "k", REPORT_BALLOT_K)?;
    Ok(Json(s.platform.borda(&id, segment, k)?))
}

async fn shift(
    State(s): State<AppState>,
    Path(id): Path<SessionId>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.platform.consensus_shift(&id)?))
}

async fn packet(
    State(s): State<AppState>,
    Path((id, pid)): Path<(SessionId, ParticipantId)>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.platform.participant_packet(&id, &pid)?))
}

/// `?forced=true` builds a draft report before Complete; facilitator only.
async fn report(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let forced: bool = parse_num(&q, "forced", false)?;
    if forced {
        s.facilitator(&headers)?;
    }
    Ok(Json(s.platform.report(&id, forced)?))
}

async fn export(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<SessionId>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    s.facilitator(&headers)?;
    let format: ExportFormat = q.get("format").map_or("json", String::as_str).parse()?;
    Ok(match s.platform.export(&id, format)? {
        ExportDocument::Json(text) => {
            ([(header::CONTENT_TYPE, "application/json")], text).into_response()
        }
        ExportDocument::CsvBundle(files) => {
            Json(serde_json::json!({ "files": files })).into_response()
        }
        ExportDocument::Markdown(text) => {
            ([(header::CONTENT_TYPE, "text/markdown; charset=utf-8")], text).into_response()
        }
    })
}
