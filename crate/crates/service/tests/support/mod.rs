//! In-process harness for the HTTP API and the API-contract checker.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use peerhol::engine::{Engine, EngineConfig};
use peerhol::store::{Store, StoreConfig};
use peerhol_service::wire::{Credentials, ExecuteRequest};
use peerhol_service::{router, AppState, ROUTES};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const IMPL_SCRIPT: &str = include_str!("../../../core/scripts/impl.ps");

pub struct Harness {
    pub state: AppState,
    app: Router,
}

impl Harness {
    pub fn new() -> Harness {
        Harness::with(EngineConfig::default(), Duration::from_secs(24 * 60 * 60))
    }

    pub fn with(config: EngineConfig, idle: Duration) -> Harness {
        let engine = Engine::open(Store::memory(StoreConfig::deterministic(3)), config).expect("engine");
        Harness::from_state(AppState::new(Arc::new(engine), idle))
    }

    pub fn from_state(state: AppState) -> Harness {
        Harness { app: router(state.clone()), state }
    }

    pub async fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(Method::from_bytes(method.as_bytes()).unwrap()).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
        let v = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, v)
    }

    pub async fn register(&self, login: &str, password: &str) -> StatusCode {
        self.call("POST", "/api/user", None, Some(json!({ "login": login, "password": password }))).await.0
    }

    pub async fn login(&self, login: &str, password: &str) -> (StatusCode, Value) {
        self.call("POST", "/api/login", None, Some(json!({ "login": login, "password": password }))).await
    }

    /// Registers (if needed) and logs in; returns the session token.
    pub async fn session(&self, login: &str) -> String {
        let _ = self.register(login, "pw").await;
        let (s, v) = self.login(login, "pw").await;
        assert_eq!(s, StatusCode::OK, "{v}");
        v["session"].as_str().unwrap().to_string()
    }

    pub async fn execute(&self, token: &str, script: &str, chronicle: Option<&str>) -> (StatusCode, Value) {
        let mut body = json!({ "script": script });
        if let Some(c) = chronicle {
            body["chronicle"] = json!(c);
        }
        self.call("POST", "/api/execute", Some(token), Some(body)).await
    }

    /// Context entities and chronicle versions, the records only scripts
    /// may create.
    pub fn immutable(&self) -> BTreeMap<String, Vec<u8>> {
        let store = self.state.engine.store();
        ["ctx/", "ver/"].iter().flat_map(|p| store.keys(p)).map(|k| (k.clone(), store.get_raw(&k).unwrap())).collect()
    }
}

/// `path` with every `{param}` replaced.
pub fn concrete(path: &str, root: &str) -> String {
    let (entity, index) = root.split_once(':').unwrap();
    path.replace("{key}", entity)
        .replace("{index}", index)
        .replace("{owner}", "system")
        .replace("{name}", "root")
        .replace("{version}", "1")
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Fields that would let a client hand the server a ready-made logical
/// object.
pub const FORBIDDEN_FIELDS: &[&str] = &[
    "theorem", "proposition", "prop", "term", "context", "parent", "constants", "assumptions", "values", "unbound",
    "owned", "deps", "dependencies", "finalContext", "final_context", "record", "entity", "version", "versions",
];

fn keys_of(v: &impl serde::Serialize) -> Vec<String> {
    let mut k: Vec<String> = serde_json::to_value(v).unwrap().as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

pub async fn api_contract() -> Result<String, String> {
    let h = Harness::new();
    let mut checks = 0usize;

    // login joins the live session
    ensure!(h.register("ann", "secret").await == StatusCode::CREATED, "registration failed");
    ensure!(h.register("ann", "other").await == StatusCode::CONFLICT, "duplicate login accepted");
    let (s1, v1) = h.login("ann", "secret").await;
    let (s2, v2) = h.login("ann", "secret").await;
    ensure!(s1 == StatusCode::OK && s2 == StatusCode::OK, "login failed: {v1} {v2}");
    let token = v1["session"].as_str().ok_or("no session token")?.to_string();
    ensure!(token.len() == 32, "token is not 128 bits of hex: {token}");
    ensure!(v2["session"] == v1["session"], "second login opened a new session");
    let (bad_pw, e1) = h.login("ann", "wrong").await;
    let (bad_user, e2) = h.login("nobody", "secret").await;
    ensure!(bad_pw == StatusCode::UNAUTHORIZED && bad_user == StatusCode::UNAUTHORIZED, "bad credentials accepted");
    ensure!(e1 == e2 && e1["error"] == "AuthFailure", "failures are distinguishable: {e1} / {e2}");
    checks += 6;

    let root = h.state.engine.root().to_string();
    let authed: Vec<_> = ROUTES.iter().filter(|r| r.authenticated).collect();
    ensure!(authed.len() == 6, "{} authenticated routes", authed.len());

    // every authenticated route works with the token and rejects missing or bogus ones
    for r in &authed {
        let path = concrete(r.path, &root);
        let body = (r.method == "POST").then(|| json!({ "script": "val x = 1" }));
        let (ok, v) = h.call(r.method, &path, Some(&token), body.clone()).await;
        ensure!(ok == StatusCode::OK, "{} {path} with a session: {ok} {v}", r.method);
        for t in [None, Some("0123456789abcdef0123456789abcdef"), Some("")] {
            let (s, _) = h.call(r.method, &path, t, body.clone()).await;
            ensure!(s == StatusCode::UNAUTHORIZED, "{} {path} with {t:?}: {s}", r.method);
            checks += 1;
        }
    }

    // logout invalidates, and is idempotent
    ensure!(h.call("POST", "/api/logout", Some(&token), None).await.0 == StatusCode::OK, "logout failed");
    for r in &authed {
        let path = concrete(r.path, &root);
        let body = (r.method == "POST").then(|| json!({ "script": "val x = 1" }));
        let (s, _) = h.call(r.method, &path, Some(&token), body).await;
        ensure!(s == StatusCode::UNAUTHORIZED, "{} {path} after logout: {s}", r.method);
        checks += 1;
    }
    ensure!(h.call("POST", "/api/logout", Some(&token), None).await.0 == StatusCode::OK, "double logout");
    ensure!(h.call("POST", "/api/logout", Some("garbage"), None).await.0 == StatusCode::OK, "garbage logout");
    ensure!(h.call("POST", "/api/logout", None, None).await.0 == StatusCode::OK, "logout without token");
    let (_, v3) = h.login("ann", "secret").await;
    ensure!(v3["session"] != v1["session"], "logged-out session was rejoined");
    let token = v3["session"].as_str().unwrap().to_string();
    checks += 4;

    // structural guarantee: declared bodies are exactly the request types,
    // and none of their fields carries a logical object
    let creds = keys_of(&Credentials { login: String::new(), password: String::new() });
    let mut exec = ExecuteRequest { script: String::new(), chronicle: Some(String::new()), ..Default::default() };
    exec.assignment.insert("a:b".into(), 1);
    let exec = keys_of(&exec);
    for r in ROUTES {
        let mut declared: Vec<String> = r.body.iter().map(|s| s.to_string()).collect();
        declared.sort();
        let expected = match r.path {
            "/api/user" | "/api/login" => creds.clone(),
            "/api/execute" => exec.clone(),
            _ => Vec::new(),
        };
        ensure!(declared == expected, "{} declares {declared:?}, accepts {expected:?}", r.path);
        for f in r.body {
            ensure!(!FORBIDDEN_FIELDS.contains(f), "{} accepts '{f}'", r.path);
        }
        checks += 1;
    }

    // raw payloads sent anywhere create nothing
    let before = h.immutable();
    let payloads = [
        json!({ "theorem": { "proposition": "false", "context": root } }),
        json!({ "script": "val x = 1", "theorem": "⊢ false" }),
        json!({ "script": "val x = 1", "context": { "parent": root, "assumptions": ["false"] } }),
        json!({ "script": "val x = 1", "chronicle": "x", "version": { "owned": [root], "finalContext": root } }),
        json!({ "login": "ann", "password": "secret", "proposition": "false" }),
    ];
    // logout last, it would end the session
    let mut routes: Vec<_> = ROUTES.iter().collect();
    routes.sort_by_key(|r| r.path == "/api/logout");
    for r in routes {
        let path = concrete(r.path, &root);
        for p in &payloads {
            let (s, v) = h.call(r.method, &path, Some(&token), Some(p.clone())).await;
            if !r.body.is_empty() {
                ensure!(s == StatusCode::BAD_REQUEST, "{} {path} accepted {p}: {s} {v}", r.method);
            }
            checks += 1;
        }
    }
    // write methods on read routes and unknown routes
    for (m, p) in [
        ("POST", format!("/api/context/{}", root.replace(':', "/"))),
        ("PUT", format!("/api/context/{}", root.replace(':', "/"))),
        ("DELETE", format!("/api/context/{}", root.replace(':', "/"))),
        ("POST", "/api/chronicle/system/root".to_string()),
        ("PUT", "/api/chronicle/system/root/1".to_string()),
        ("POST", "/api/chronicles".to_string()),
        ("POST", "/api/theorem".to_string()),
        ("POST", "/api/context".to_string()),
        ("POST", "/api/version".to_string()),
    ] {
        let (s, _) = h.call(m, &p, Some(&token), Some(payloads[0].clone())).await;
        ensure!(s == StatusCode::METHOD_NOT_ALLOWED || s == StatusCode::NOT_FOUND, "{m} {p}: {s}");
        checks += 1;
    }
    ensure!(h.immutable() == before, "a raw payload changed the context tree or a chronicle");
    let token = h.login("ann", "secret").await.1["session"].as_str().unwrap_or_default().to_string();

    // the only way in is a script
    let (s, v) = h.execute(&token, IMPL_SCRIPT, None).await;
    ensure!(s == StatusCode::OK, "impl script: {s} {v}");
    let bindings = v["bindings"].as_array().ok_or("no bindings")?;
    let theorems: std::collections::BTreeSet<&str> =
        bindings.iter().filter(|b| b["kind"] == "theorem").filter_map(|b| b["value"].as_str()).collect();
    let named = bindings.iter().any(|b| b["name"] == "impl" && b["value"] == "⊢ ∀ x : prop. x ⟶ x");
    ensure!(named && theorems.len() == 1, "impl report: {v}");
    ensure!(h.immutable() != before, "a script created nothing");
    let (s, v) = h.execute(&token, "fix \"x : prop\"\nhave bad = \"x\" by root.trueI", None).await;
    ensure!(s == StatusCode::UNPROCESSABLE_ENTITY && v["error"] == "GuardMismatch", "guard failure: {s} {v}");
    ensure!(v["line"] == 2 && v["column"].as_u64().is_some(), "guard failure position: {v}");
    let (s, _) = h.execute(&token, "fix \"y : set\"", Some("lib")).await;
    ensure!(s == StatusCode::OK, "publish lib: {s}");
    let (s, v) = h.execute(&token, "with @lib do fix \"z : set\" end", Some("lib")).await;
    ensure!(s == StatusCode::UNPROCESSABLE_ENTITY && v["error"] == "DependencyCycle", "self dependency: {s} {v}");
    checks += 4;

    Ok(format!("{} routes, {checks} checks; join, logout, 401 and structural audit hold", ROUTES.len()))
}
