//! HTTP + JSON front end for evbox sessions.
//!
//! Each session owns an [`Engine`]. Mutating actions take the session's
//! writer lock; reads work on the latest published snapshot and never wait
//! for a writer.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evbox_core::engine::{panel, Action, Engine, EventBoxRequest, Page, PanelKind, SessionState};
use evbox_core::eventbox::{render_svg, EventBoxConfig, SvgStyle};
use evbox_core::stats::{render_markdown, ReportConfig};
use evbox_core::Error;
use parking_lot::RwLock;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;
use uuid::Uuid;

pub const STATE_VERSION_HEADER: &str = "x-state-version";

struct Session {
    engine: Arc<Mutex<Engine>>,
    snapshot: RwLock<Arc<SessionState>>,
}

impl Session {
    fn snapshot(&self) -> Arc<SessionState> {
        Arc::clone(&self.snapshot.read())
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<Uuid, Arc<Session>>>>,
    /// Anchors relative file paths in `load` and `import_labels`.
    data_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        AppState { sessions: Default::default(), data_dir }
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::unknown_session(id))?;
        self.sessions.read().get(&id).cloned().ok_or_else(|| ApiError::unknown_session(&id.to_string()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/eventbox", get(get_eventbox))
        .route("/sessions/{id}/report", get(get_report))
        .route("/sessions/{id}/panels/{kind}", get(get_panel))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn unknown_session(id: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            body: json!({ "error": { "code": "NotFoundError", "message": format!("no session `{id}`") } }),
        }
    }

    fn bad_request(message: String) -> Self {
        ApiError::from(Error::Config(message))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Conflict { .. } => StatusCode::CONFLICT,
            e if e.is_validation() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut err = json!({ "code": e.code(), "message": e.to_string() });
        match &e {
            Error::Parse(p) => err["details"] = json!(p),
            Error::Conflict { expected, actual } => {
                err["details"] = json!({ "expected": expected, "state_version": actual })
            }
            _ => {}
        }
        ApiError { status, body: json!({ "error": err }) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

async fn create_session(State(app): State<AppState>) -> ApiResult {
    let id = Uuid::new_v4();
    let engine = Engine::new(app.data_dir.clone());
    let snapshot = RwLock::new(engine.state());
    app.sessions.write().insert(id, Arc::new(Session { engine: Arc::new(Mutex::new(engine)), snapshot }));
    log::info!("session {id} created");
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id, "state_version": 0 }))).into_response())
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.session(&id)?;
    let id = Uuid::parse_str(&id).expect("validated above");
    app.sessions.write().remove(&id);
    Ok(StatusCode::NO_CONTENT.into_response())
}

/// Splits `{action, params, expected_state_version}` into its parts.
fn parse_action(mut body: Value) -> Result<(Action, Option<u64>), ApiError> {
    let expected = match body.as_object_mut().and_then(|o| o.remove("expected_state_version")) {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64().ok_or_else(|| ApiError::bad_request("expected_state_version must be a non-negative integer".into()))?,
        ),
    };
    let action = serde_json::from_value(body).map_err(|e| ApiError::bad_request(format!("action: {e}")))?;
    Ok((action, expected))
}

async fn post_action(State(app): State<AppState>, Path(id): Path<String>, Json(body): Json<Value>) -> ApiResult {
    let session = app.session(&id)?;
    let (action, expected) = parse_action(body)?;
    if action.is_read() {
        let snap = session.snapshot();
        if let Some(e) = expected {
            if e != snap.state_version {
                return Err(Error::Conflict { expected: e, actual: snap.state_version }.into());
            }
        }
        let name = action.name();
        let result = tokio::task::spawn_blocking(move || snap.read(&action).map(|r| (snap.state_version, r)))
            .await
            .map_err(|e| ApiError::from(Error::State(format!("worker failed: {e}"))))??;
        return Ok(Json(json!({ "state_version": result.0, "action": name, "result": result.1 })).into_response());
    }
    let mut engine = Arc::clone(&session.engine).lock_owned().await;
    let session2 = Arc::clone(&session);
    let outcome = tokio::task::spawn_blocking(move || {
        let outcome = engine.apply(&action, expected)?;
        // Publish while still holding the writer lock so snapshots only move forward.
        *session2.snapshot.write() = engine.state();
        Ok::<_, Error>(outcome)
    })
    .await
    .map_err(|e| ApiError::from(Error::State(format!("worker failed: {e}"))))??;
    Ok(Json(outcome).into_response())
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    Ok(Json(app.session(&id)?.snapshot().summary()).into_response())
}

async fn get_log(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = app.session(&id)?;
    let engine = session.engine.lock().await;
    Ok(Json(json!({ "state_version": engine.state_version(), "actions": engine.log() })).into_response())
}

fn with_version(mut resp: Response, version: u64) -> Response {
    resp.headers_mut().insert(STATE_VERSION_HEADER, HeaderValue::from(version));
    resp
}

fn split_list(s: &Option<String>) -> Vec<String> {
    s.as_deref()
        .map(|s| s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect())
        .unwrap_or_default()
}

#[derive(Debug, Deserialize)]
pub struct EventBoxQuery {
    event_type: String,
    p_h: Option<String>,
    p_v: Option<String>,
    s_h: Option<String>,
    s_v: Option<String>,
    b: Option<String>,
    bins_h: Option<usize>,
    bins_v: Option<usize>,
    show_outliers: Option<bool>,
    w: Option<f64>,
    top_k: Option<usize>,
    #[serde(default)]
    breakdown: bool,
    /// Comma-separated breakdown values to merge back into one box.
    merge: Option<String>,
    format: Option<String>,
}

impl EventBoxQuery {
    fn request(&self) -> EventBoxRequest {
        let d = EventBoxConfig::default();
        EventBoxRequest {
            event_type: self.event_type.clone(),
            config: EventBoxConfig {
                p_h: self.p_h.clone().unwrap_or(d.p_h),
                p_v: self.p_v.clone().unwrap_or(d.p_v),
                s_h: self.s_h.clone(),
                s_v: self.s_v.clone(),
                b: self.b.clone(),
                bins_h: self.bins_h.unwrap_or(d.bins_h),
                bins_v: self.bins_v.unwrap_or(d.bins_v),
                show_outliers: self.show_outliers.unwrap_or(d.show_outliers),
                w: self.w.unwrap_or(d.w),
                top_k: self.top_k,
            },
        }
    }
}

async fn get_eventbox(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<EventBoxQuery>) -> ApiResult {
    let snap = app.session(&id)?.snapshot();
    let version = snap.state_version;
    let req = q.request();
    let svg = match q.format.as_deref() {
        None | Some("json") => false,
        Some("svg") => true,
        Some(other) => return Err(ApiError::bad_request(format!("unknown format `{other}`"))),
    };
    let merge = split_list(&q.merge);
    let breakdown = q.breakdown;
    let body = tokio::task::spawn_blocking(move || -> Result<Response, Error> {
        let boxes = if breakdown {
            snap.breakdown(&req)?
        } else if !merge.is_empty() {
            vec![snap.merge(&req, &merge)?]
        } else {
            vec![snap.eventbox(&req)?]
        };
        if svg {
            if boxes.len() != 1 {
                return Err(Error::Config("svg output renders a single box; drop breakdown".into()));
            }
            let types = snap.dataset()?.event_types();
            let style = SvgStyle::for_type_index(types.iter().position(|t| *t == req.event_type).unwrap_or(0));
            let mut resp = render_svg(&boxes[0], &style).into_response();
            resp.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("image/svg+xml"));
            return Ok(resp);
        }
        Ok(if breakdown {
            Json(json!({ "state_version": snap.state_version, "children": boxes })).into_response()
        } else {
            Json(json!({ "state_version": snap.state_version, "eventbox": boxes[0] })).into_response()
        })
    })
    .await
    .map_err(|e| ApiError::from(Error::State(format!("worker failed: {e}"))))??;
    Ok(with_version(body, version))
}

#[derive(Debug, Deserialize)]
pub struct ReportQuery {
    format: Option<String>,
    continuous: Option<String>,
    categorical: Option<String>,
    response: Option<String>,
    factors: Option<String>,
    max_order: Option<usize>,
    alpha: Option<f64>,
    event_type: Option<String>,
}

impl ReportQuery {
    fn config(&self) -> ReportConfig {
        let d = ReportConfig::default();
        ReportConfig {
            continuous: split_list(&self.continuous),
            categorical: split_list(&self.categorical),
            response: self.response.clone(),
            factors: self.factors.as_ref().map(|_| split_list(&self.factors)),
            max_order: self.max_order.unwrap_or(d.max_order),
            alpha: self.alpha.unwrap_or(d.alpha),
            event_type: self.event_type.clone(),
        }
    }
}

async fn get_report(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    let snap = app.session(&id)?.snapshot();
    let version = snap.state_version;
    let markdown = match q.format.as_deref() {
        None | Some("json") => false,
        Some("md") => true,
        Some(other) => return Err(ApiError::bad_request(format!("unknown format `{other}`"))),
    };
    let config = q.config();
    let report = tokio::task::spawn_blocking(move || snap.report(&config))
        .await
        .map_err(|e| ApiError::from(Error::State(format!("worker failed: {e}"))))??;
    let resp = if markdown {
        let mut r = render_markdown(&report).into_response();
        r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("text/markdown; charset=utf-8"));
        r
    } else {
        Json(json!({ "state_version": version, "report": report })).into_response()
    };
    Ok(with_version(resp, version))
}

async fn get_panel(
    State(app): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(page): Query<Page>,
) -> ApiResult {
    let snap = app.session(&id)?.snapshot();
    let kind: PanelKind = kind.parse()?;
    let version = snap.state_version;
    let body = tokio::task::spawn_blocking(move || panel(&snap, kind, page))
        .await
        .map_err(|e| ApiError::from(Error::State(format!("worker failed: {e}"))))??;
    Ok(with_version(Json(body).into_response(), version))
}
