//! Drive the session HTTP API in-process: create a session, send a few
//! actions, try a bad request, and export the log. Nothing listens on a
//! socket; `explab serve` does that.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use explab::service::{router, SessionStore, SystemClock};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (u16, Value) {
    let body = body.map_or_else(Body::empty, |v| Body::from(v.to_string()));
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main(flavor = "current_thread")]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let (store, _) = SessionStore::open(dir.path(), Arc::new(SystemClock))?;
    let app = router(Arc::new(store));

    let (status, view) = call(&app, Method::POST, "/sessions", Some(json!({"experiment": 2, "condition": "dense", "subject": "demo"}))).await;
    let id = view["session_id"].as_str().unwrap().to_string();
    println!("POST /sessions -> {status}: phase {}, {} visible cells", view["phase"], view["visible_cells"].as_array().unwrap().len());

    for action in ["forward", "turn_right", "forward", "strafe_left", "back"] {
        let (status, step) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "action": action }))).await;
        println!("{action:>12} -> {status}: pose {}, entered {}", step["pose"], step["entered_cell"]);
    }

    let (status, err) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({"action": "jump"}))).await;
    println!("        jump -> {status}: {}", err["error"]);
    let (status, err) = call(&app, Method::POST, &format!("/sessions/{id}/advance"), None).await;
    println!("     advance -> {status}: {}", err["error"]);

    let (status, log) = call(&app, Method::GET, &format!("/sessions/{id}/export"), None).await;
    println!("export -> {status}: {} records in phase 1", log["phases"][0]["log"]["records"].as_array().map_or(0, Vec::len));
    println!("session directory: {}", dir.path().join(&id).display());
    Ok(())
}
