mod support;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::http::StatusCode;
use peerhol::engine::{Engine, EngineConfig};
use peerhol::store::{Store, StoreConfig};
use peerhol_service::{AppState, ServiceConfig};
use serde_json::json;
use support::{Harness, IMPL_SCRIPT};

#[tokio::test]
async fn contract() {
    match support::api_contract().await {
        Ok(summary) => println!("{summary}"),
        Err(e) => panic!("{e}"),
    }
}

#[tokio::test]
async fn root_and_fix_context_documents() {
    let h = Harness::new();
    let t = h.session("ann").await;
    // the root theory's final context; its parents lead up to the tree's root
    let mut root = h.state.engine.root().to_string().replace(':', "/");
    let mut hops = 0;
    let v = loop {
        let (s, v) = h.call("GET", &format!("/api/context/{root}"), Some(&t), None).await;
        assert_eq!(s, StatusCode::OK);
        match v["parent"].as_str() {
            Some(p) => root = p.replace(':', "/"),
            None => break v,
        }
        hops += 1;
    };
    assert!(hops > 10, "{hops}");
    assert_eq!(v["kind"], "root");
    assert!(v["parent"].is_null());
    assert_eq!(v["owner"], "system");
    assert_eq!(v["depth"], 0);

    let (_, out) = h.execute(&t, "fix \"f : set → prop\"\nassume h = \"f ∅\"", None).await;
    let fix = out["created"][0].as_str().unwrap().replace(':', "/");
    let (_, v) = h.call("GET", &format!("/api/context/{fix}"), Some(&t), None).await;
    assert_eq!(v["kind"], "fix");
    assert_eq!(v["constants"], json!([{ "name": "f", "type": "set → prop" }]));
    let (_, v) = h.call("GET", &format!("/api/context/{fix}?ascii=1"), Some(&t), None).await;
    assert_eq!(v["constants"][0]["type"], "set -> prop");
    let assume = out["created"][1].as_str().unwrap().replace(':', "/");
    let (_, v) = h.call("GET", &format!("/api/context/{assume}"), Some(&t), None).await;
    assert_eq!(v["assumptions"], json!(["f ∅"]));
    let (_, v) = h.call("GET", &format!("/api/context/{assume}?ascii=1"), Some(&t), None).await;
    assert_eq!(v["assumptions"], json!(["f _emptyset"]));

    let entity = root.split('/').next().unwrap();
    for bad in [format!("{entity}/999"), format!("{entity}/x"), "nope/0".to_string()] {
        let (s, _) = h.call("GET", &format!("/api/context/{bad}"), Some(&t), None).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "{bad}");
    }
}

#[tokio::test]
async fn values_are_printed_and_functions_summarized() {
    let h = Harness::new();
    let t = h.session("ann").await;
    let (_, out) = h.execute(&t, "let n = 42\nlet f = fn x => x", None).await;
    let f = out["created"][1].as_str().unwrap().replace(':', "/");
    let (_, v) = h.call("GET", &format!("/api/context/{f}"), Some(&t), None).await;
    assert_eq!(v["values"], json!([{ "name": "f", "kind": "function", "value": "<function>" }]));
}

#[tokio::test]
async fn chronicle_documents_follow_the_graph() {
    let h = Harness::with(EngineConfig { auto_repair: false, ..EngineConfig::default() }, Duration::from_secs(60));
    let ann = h.session("ann").await;
    let bob = h.session("bob").await;
    let (s, v) = h.execute(&ann, "have l = \"true\" by root.trueI", Some("lib")).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["published"], json!({ "owner": "ann", "name": "lib", "version": 1 }));
    let (_, v) = h.call("GET", "/api/chronicle/ann/lib", Some(&bob), None).await;
    assert_eq!(v["versions"].as_array().unwrap().len(), 1);
    assert_eq!(v["status"], json!({ "upToDate": true }));
    assert_eq!(v["versions"][0]["dependencies"], json!([{ "owner": "system", "name": "root", "version": 1 }]));

    h.execute(&bob, "with @ann:lib do have u = \"true\" by l end", Some("use")).await;
    h.execute(&ann, "have l = \"true\" by root.trueI\nhave m = \"true\" by l", Some("lib")).await;
    let (_, v) = h.call("GET", "/api/chronicle/bob/use", Some(&ann), None).await;
    assert_eq!(v["status"]["upToDate"], false);
    let (_, list) = h.call("GET", "/api/chronicles", Some(&ann), None).await;
    let names: Vec<(&str, bool)> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap(), c["status"]["upToDate"].as_bool().unwrap()))
        .collect();
    assert_eq!(names, [("lib", true), ("use", false), ("root", true)]);

    let (s, v) = h.call("POST", "/api/repair", Some(&ann), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["regenerated"], json!([{ "owner": "bob", "name": "use", "version": 2 }]));
    let (_, v) = h.call("GET", "/api/chronicle/bob/use", Some(&ann), None).await;
    assert_eq!(v["status"], json!({ "upToDate": true }));
    assert_eq!(v["versions"][0]["version"], 2);
    let (_, v) = h.call("GET", "/api/chronicle/bob/use/1", Some(&ann), None).await;
    assert_eq!(v["dependencies"], json!([{ "owner": "ann", "name": "lib", "version": 1 }]));

    for missing in ["/api/chronicle/ann/nope", "/api/chronicle/ann/lib/9", "/api/chronicle/ann/lib/x"] {
        assert_eq!(h.call("GET", missing, Some(&ann), None).await.0, StatusCode::NOT_FOUND, "{missing}");
    }
}

#[tokio::test]
async fn assignments_pin_versions() {
    let h = Harness::new();
    let t = h.session("ann").await;
    h.execute(&t, "fix \"a : set\"", Some("lib")).await;
    h.execute(&t, "fix \"b : set\"", Some("lib")).await;
    let body = json!({ "script": "val c = with @ann:lib do this end", "assignment": { "ann:lib": 1 } });
    let (s, v) = h.call("POST", "/api/execute", Some(&t), Some(body)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let ctx = v["bindings"][0]["value"].as_str().unwrap().to_string();
    let body = json!({ "script": "val c = with @ann:lib do this end" });
    let (_, v) = h.call("POST", "/api/execute", Some(&t), Some(body)).await;
    assert_ne!(v["bindings"][0]["value"].as_str().unwrap(), ctx);
    let body = json!({ "script": "val x = 1", "assignment": { "nocolon": 1 } });
    assert_eq!(h.call("POST", "/api/execute", Some(&t), Some(body)).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn ascii_reports() {
    let h = Harness::new();
    let t = h.session("ann").await;
    let (_, v) = h.call("POST", "/api/execute?ascii=1", Some(&t), Some(json!({ "script": IMPL_SCRIPT }))).await;
    let shown: Vec<&str> = v["bindings"].as_array().unwrap().iter().map(|b| b["value"].as_str().unwrap()).collect();
    assert!(shown.iter().all(|s| *s == "|- _all x : prop. x --> x"), "{v}");
}

#[tokio::test]
async fn idle_sessions_expire() {
    let engine = Engine::open(Store::memory(StoreConfig::deterministic(1)), EngineConfig::default()).unwrap();
    let now = Arc::new(AtomicU64::new(1_000));
    let clock = now.clone();
    let state = AppState::new(Arc::new(engine), Duration::from_secs(10)).with_clock(move || clock.load(Ordering::SeqCst));
    let h = Harness::from_state(state);
    let t = h.session("ann").await;
    now.store(9_000, Ordering::SeqCst);
    assert_eq!(h.call("GET", "/api/chronicles", Some(&t), None).await.0, StatusCode::OK);
    // activity resets the idle timer
    now.store(18_000, Ordering::SeqCst);
    assert_eq!(h.call("GET", "/api/chronicles", Some(&t), None).await.0, StatusCode::OK);
    now.store(28_001, Ordering::SeqCst);
    assert_eq!(h.call("GET", "/api/chronicles", Some(&t), None).await.0, StatusCode::UNAUTHORIZED);
    // and a new login gets a fresh token
    let (_, v) = h.login("ann", "pw").await;
    assert_ne!(v["session"].as_str().unwrap(), t);
}

#[tokio::test]
async fn sessions_and_users_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store");
    let open = || {
        let engine = Engine::open(Store::open_file(&path, StoreConfig::default()).unwrap(), EngineConfig::default()).unwrap();
        Harness::from_state(AppState::new(Arc::new(engine), Duration::from_secs(60)))
    };
    let t = {
        let h = open();
        h.session("ann").await
    };
    let h = open();
    assert_eq!(h.call("GET", "/api/chronicles", Some(&t), None).await.0, StatusCode::OK);
    let (_, v) = h.login("ann", "pw").await;
    assert_eq!(v["session"].as_str().unwrap(), t);
}

#[tokio::test]
async fn invalid_logins_are_refused() {
    let h = Harness::new();
    for bad in ["", "has space", "a/b", "system"] {
        assert_eq!(h.register(bad, "pw").await, StatusCode::BAD_REQUEST, "{bad:?}");
    }
    let (s, _) = h.call("POST", "/api/login", None, Some(json!({ "login": "ann" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[test]
fn config_files_and_environment() {
    let cfg = ServiceConfig::from_toml("port = 9000\nstore = \"/tmp/x.store\"\nauto_repair = false").unwrap();
    assert_eq!(cfg.port, 9000);
    assert!(!cfg.auto_repair);
    assert_eq!(cfg.session_idle_secs, 86_400);
    assert!(ServiceConfig::from_toml("prot = 1").is_err());
    let mut cfg = cfg;
    let env = |k: &str| match k {
        "PEERHOL_PORT" => Some("9100".to_string()),
        "PEERHOL_BOOTSTRAP" => Some("/etc/theory.ps".to_string()),
        _ => None,
    };
    cfg.apply_env(env).unwrap();
    assert_eq!(cfg.port, 9100);
    assert_eq!(cfg.bootstrap.as_deref(), Some(std::path::Path::new("/etc/theory.ps")));
    assert!(cfg.apply_env(|k| (k == "PEERHOL_PORT").then(|| "many".to_string())).is_err());
}

#[test]
fn custom_bootstrap_theory() {
    let dir = tempfile::tempdir().unwrap();
    let theory = dir.path().join("theory.ps");
    std::fs::write(&theory, "assume ax = \"∀ x : set. x ∈ x\"").unwrap();
    let cfg = ServiceConfig { bootstrap: Some(theory), ..ServiceConfig::default() };
    let engine = cfg.open_engine().unwrap();
    let out = engine.execute(&peerhol::engine::ExecRequest::new("ann", "val t = root.ax")).unwrap();
    assert_eq!(out.binding("t"), Some("⊢ ∀ x. x ∈ x"));
}
