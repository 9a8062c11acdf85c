use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use peerhol::chronicle::{ChronicleId, Status};
use peerhol::context::{ContextRef, ContextSource};
use peerhol::engine::{Engine, ExecRequest};
use peerhol::syntax::Mode;

use crate::accounts::{now_millis, Accounts, AuthError};
use crate::wire::{
    ChronicleDoc, ChronicleSummary, ContextDoc, Credentials, ErrorDoc, ExecuteRequest, ExecuteResponse, RepairDoc,
    SessionResponse, VersionDoc,
};

/// One entry per route the router serves. `body` lists every field the
/// route accepts in its JSON body.
#[derive(Clone, Copy, Debug)]
pub struct RouteSpec {
    pub method: &'static str,
    pub path: &'static str,
    pub authenticated: bool,
    pub body: &'static [&'static str],
}

pub const ROUTES: &[RouteSpec] = &[
    RouteSpec { method: "POST", path: "/api/user", authenticated: false, body: &["login", "password"] },
    RouteSpec { method: "POST", path: "/api/login", authenticated: false, body: &["login", "password"] },
    RouteSpec { method: "POST", path: "/api/logout", authenticated: false, body: &[] },
    RouteSpec { method: "POST", path: "/api/execute", authenticated: true, body: &["script", "chronicle", "assignment"] },
    RouteSpec { method: "GET", path: "/api/context/{key}/{index}", authenticated: true, body: &[] },
    RouteSpec { method: "GET", path: "/api/chronicles", authenticated: true, body: &[] },
    RouteSpec { method: "GET", path: "/api/chronicle/{owner}/{name}", authenticated: true, body: &[] },
    RouteSpec { method: "GET", path: "/api/chronicle/{owner}/{name}/{version}", authenticated: true, body: &[] },
    RouteSpec { method: "POST", path: "/api/repair", authenticated: true, body: &[] },
];

type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub accounts: Arc<Accounts>,
    clock: Clock,
}

impl AppState {
    pub fn new(engine: Arc<Engine>, idle: std::time::Duration) -> AppState {
        let accounts = Arc::new(Accounts::load(engine.store(), idle, now_millis()));
        AppState { engine, accounts, clock: Arc::new(now_millis) }
    }

    /// Replaces the wall clock (milliseconds), for expiry tests.
    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> AppState {
        self.clock = Arc::new(clock);
        self
    }

    fn now(&self) -> u64 {
        (self.clock)()
    }
}

pub struct ApiError {
    status: StatusCode,
    doc: ErrorDoc,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> ApiError {
        ApiError { status, doc: ErrorDoc::new(error, message) }
    }

    fn unauthorized() -> ApiError {
        ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "missing, invalid or expired session")
    }

    fn not_found(what: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", what)
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.doc)).into_response()
    }
}

impl From<AuthError> for ApiError {
    fn from(e: AuthError) -> ApiError {
        let (status, name) = match e {
            AuthError::Failure => (StatusCode::UNAUTHORIZED, "AuthFailure"),
            AuthError::Taken(_) => (StatusCode::CONFLICT, "LoginTaken"),
            AuthError::InvalidLogin(_) => (StatusCode::BAD_REQUEST, "InvalidLogin"),
            AuthError::Storage(_) => (StatusCode::INTERNAL_SERVER_ERROR, "StorageError"),
        };
        ApiError::new(status, name, e.to_string())
    }
}

fn bearer(parts: &Parts) -> Option<&str> {
    parts.headers.get(header::AUTHORIZATION)?.to_str().ok()?.strip_prefix("Bearer ").map(str::trim)
}

/// The login of the caller's live session.
pub struct Authed(pub String);

impl FromRequestParts<AppState> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Authed, ApiError> {
        let token = bearer(parts).ok_or_else(ApiError::unauthorized)?;
        state.accounts.check(state.engine.store(), token, state.now()).map(Authed).ok_or_else(ApiError::unauthorized)
    }
}

fn mode(q: &HashMap<String, String>) -> Mode {
    match q.get("ascii").map(String::as_str) {
        Some("1" | "true" | "yes") => Mode::Ascii,
        _ => Mode::Unicode,
    }
}

fn body<T>(b: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    b.map(|Json(t)| t).map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))
}

async fn register(
    State(st): State<AppState>,
    b: Result<Json<Credentials>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let c = body(b)?;
    let now = st.now();
    let login = c.login.clone();
    blocking(move || st.accounts.register(st.engine.store(), &c.login, &c.password, now)).await??;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "login": login }))))
}

async fn login(
    State(st): State<AppState>,
    b: Result<Json<Credentials>, JsonRejection>,
) -> Result<Json<SessionResponse>, ApiError> {
    let c = body(b)?;
    let now = st.now();
    let session = blocking(move || st.accounts.login(st.engine.store(), &c.login, &c.password, now)).await??;
    Ok(Json(SessionResponse { session }))
}

async fn logout(State(st): State<AppState>, parts: Parts) -> Json<serde_json::Value> {
    if let Some(token) = bearer(&parts) {
        st.accounts.logout(st.engine.store(), token);
    }
    Json(serde_json::json!({ "ok": true }))
}

async fn execute(
    State(st): State<AppState>,
    Authed(user): Authed,
    Query(q): Query<HashMap<String, String>>,
    b: Result<Json<ExecuteRequest>, JsonRejection>,
) -> Result<Json<ExecuteResponse>, ApiError> {
    let b = body(b)?;
    let mut req = ExecRequest::new(user, b.script);
    req.publish = b.chronicle;
    req.mode = mode(&q);
    for (k, v) in b.assignment {
        let (owner, name) = k.split_once(':').ok_or_else(|| ApiError::bad_request(format!("'{k}' is not owner:name")))?;
        req.assignment.insert(ChronicleId::new(owner, name), v);
    }
    let engine = st.engine.clone();
    match blocking(move || engine.execute(&req)).await? {
        Ok(report) => Ok(Json(ExecuteResponse::from(&report))),
        Err(e) => Err(ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, doc: ErrorDoc::from(&e) }),
    }
}

async fn context(
    State(st): State<AppState>,
    Authed(_): Authed,
    Path((key, index)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<ContextDoc>, ApiError> {
    let missing = || ApiError::not_found(format!("no context {key}:{index}"));
    let index: u32 = index.parse().map_err(|_| missing())?;
    let store = st.engine.store();
    let ctx = store.load(&ContextRef::new(key.clone(), index)).map_err(|_| missing())?;
    Ok(Json(ContextDoc::build(store, &ctx, mode(&q))))
}

async fn chronicles(State(st): State<AppState>, Authed(_): Authed) -> Json<Vec<ChronicleSummary>> {
    let reg = st.engine.registry();
    Json(
        reg.chronicles()
            .map(|c| ChronicleSummary {
                owner: c.id.owner.clone(),
                name: c.id.name.clone(),
                newest: c.newest().version,
                status: (&st.engine.status(&c.id).unwrap_or(Status::UpToDate)).into(),
            })
            .collect(),
    )
}

async fn chronicle(
    State(st): State<AppState>,
    Authed(_): Authed,
    Path((owner, name)): Path<(String, String)>,
) -> Result<Json<ChronicleDoc>, ApiError> {
    let id = ChronicleId::new(owner, name);
    let reg = st.engine.registry();
    let c = reg.get(&id).ok_or_else(|| ApiError::not_found(format!("no chronicle {id}")))?;
    let status = st.engine.status(&id).unwrap_or(Status::UpToDate);
    Ok(Json(ChronicleDoc::build(c, &status)))
}

async fn chronicle_version(
    State(st): State<AppState>,
    Authed(_): Authed,
    Path((owner, name, version)): Path<(String, String, String)>,
) -> Result<Json<VersionDoc>, ApiError> {
    let id = ChronicleId::new(owner, name);
    let missing = || ApiError::not_found(format!("no version {version} of {id}"));
    let v: u64 = version.parse().map_err(|_| missing())?;
    let reg = st.engine.registry();
    let found = reg.get(&id).and_then(|c| c.version(v)).ok_or_else(missing)?;
    Ok(Json(VersionDoc::from(found)))
}

async fn repair(State(st): State<AppState>, Authed(_): Authed) -> Result<Json<RepairDoc>, ApiError> {
    let engine = st.engine.clone();
    let report = blocking(move || engine.repair_sweep()).await?;
    Ok(Json(RepairDoc::from(&report)))
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_string());
    let started = Instant::now();
    let res = next.run(req).await;
    log::info!(target: "peerhol::http", "{method} {path} {} {:?}", res.status().as_u16(), started.elapsed());
    res
}

/// The complete API. Every route here is listed in [`ROUTES`].
pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/user", post(register))
        .route("/api/login", post(login))
        .route("/api/logout", post(logout))
        .route("/api/execute", post(execute))
        .route("/api/context/{key}/{index}", get(context))
        .route("/api/chronicles", get(chronicles))
        .route("/api/chronicle/{owner}/{name}", get(chronicle))
        .route("/api/chronicle/{owner}/{name}/{version}", get(chronicle_version))
        .route("/api/repair", post(repair))
        .fallback(not_found)
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}
