//! The HTTP API, driven in-process: register, log in, run a script, publish
//! it, and browse what was created. Pass `--listen` to serve on
//! 127.0.0.1:8080 instead (stop with ctrl-c).
//!
//!     cargo run -p peerhol-service --example api

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use peerhol::engine::{Engine, EngineConfig};
use peerhol::store::{Store, StoreConfig};
use peerhol_service::{router, serve_on, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(path);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::open(Store::memory(StoreConfig::default()), EngineConfig::default())?;
    let state = AppState::new(Arc::new(engine), std::time::Duration::from_secs(3600));

    if std::env::args().any(|a| a == "--listen") {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
        println!("POST /api/user, then /api/login, then /api/execute with the bearer token");
        serve_on(listener, state).await?;
        return Ok(());
    }

    let app = router(state);
    let creds = json!({ "login": "ann", "password": "correct horse" });
    let (status, _) = call(&app, "POST", "/api/user", None, Some(creds.clone())).await;
    println!("register        {status}");
    let (_, session) = call(&app, "POST", "/api/login", None, Some(creds)).await;
    let token = session["session"].as_str().unwrap().to_string();
    let token = Some(token.as_str());

    let script = "have refl2 = \"∀ x : set. x = x\" by root.refl";
    let (status, res) =
        call(&app, "POST", "/api/execute", token, Some(json!({ "script": script, "chronicle": "basics" }))).await;
    println!("execute         {status}\n{}", serde_json::to_string_pretty(&res)?);
    let final_context = res["finalContext"].as_str().unwrap_or_default().replacen(':', "/", 1);
    let (_, ctx) = call(&app, "GET", &format!("/api/context/{final_context}"), token, None).await;
    println!("final context   {ctx}");

    let (status, res) = call(&app, "POST", "/api/execute", token, Some(json!({ "script": "have no = \"false\" by root.trueI" }))).await;
    println!("bad proof       {status} {res}");

    let (_, list) = call(&app, "GET", "/api/chronicles", token, None).await;
    println!("chronicles      {list}");
    let (_, doc) = call(&app, "GET", "/api/chronicle/ann/basics", token, None).await;
    println!("ann:basics      {} version(s)", doc["versions"].as_array().map_or(0, Vec::len));

    let (status, _) = call(&app, "GET", "/api/chronicles", None, None).await;
    println!("without a token {status}");
    Ok(())
}
