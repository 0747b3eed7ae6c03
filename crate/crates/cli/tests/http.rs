use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lingame_cli::service::{router, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

const THREE_BIT: &str = "((a & b) + (c & d)) & ((e & f) + (g & h))";

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, body: Value) -> (String, Value) {
    let (status, v) = call(app, "POST", "/session", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v["state"].clone())
}

#[tokio::test]
async fn three_bit_play_terminates_after_three_moves() {
    let app = router(ServiceConfig::default());
    let (id, state) = create(&app, json!({ "formula": THREE_BIT, "humanSide": "server" })).await;
    assert_eq!(state["history"].as_array().unwrap().len(), 1);
    assert_eq!(state["turn"], "s");
    assert_eq!(state["legalMoves"], json!(["L", "R"]));

    let (status, after) = call(&app, "POST", &format!("/session/{id}/move"), Some(json!({ "move": "L" }))).await;
    assert_eq!(status, StatusCode::OK, "{after}");
    assert_eq!(after["terminated"], true);
    assert_eq!(after["history"].as_array().unwrap().len(), 3);
    assert!(after.get("stuckSide").is_none());

    let (status, fetched) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched, after);
}

#[tokio::test]
async fn human_client_opens_the_three_bit_game() {
    let app = router(ServiceConfig::default());
    let (id, state) = create(&app, json!({ "formula": THREE_BIT, "humanSide": "client" })).await;
    assert_eq!(state["turn"], "c");
    assert_eq!(state["legalMoves"], json!(["L", "R"]));
    assert_eq!(state["history"], json!([]));

    let uri = format!("/session/{id}/move");
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "move": "Q" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, unchanged) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(unchanged, state);

    let (_, after) = call(&app, "POST", &uri, Some(json!({ "move": "R" }))).await;
    assert_eq!(after["history"].as_array().unwrap().len(), 2);
    let last = after["legalMoves"][0].as_str().unwrap().to_string();
    let (_, done) = call(&app, "POST", &uri, Some(json!({ "move": last }))).await;
    assert_eq!(done["terminated"], true);
    assert_eq!(done["history"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn session_errors_use_distinct_statuses() {
    let app = router(ServiceConfig::default());
    let (id, _) = create(&app, json!({ "formula": THREE_BIT, "humanSide": "server" })).await;
    let uri = format!("/session/{id}/move");

    let (status, _) = call(&app, "POST", &uri, Some(json!({ "move": "X" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, "GET", "/session/9999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/session/nope/move", Some(json!({ "move": "L" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // the human plays the client of a formula whose first move is the server's
    let (id2, state) = create(
        &app,
        json!({ "formula": "(a + b) + c", "humanSide": "client", "engine": "random", "seed": 3 }),
    )
    .await;
    assert_eq!(state["terminated"], true);
    let (status, _) = call(&app, "POST", &format!("/session/{id2}/move"), Some(json!({ "move": "L" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, "POST", &uri, Some(json!({ "move": "R" }))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "move": "L" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn explicit_atoms_and_stuck_sides() {
    let app = router(ServiceConfig::default());
    let atoms = json!({ "a": { "turn": "s", "moves": { "x": { "turn": "t" } } } });
    let (_, state) = create(&app, json!({ "formula": "a", "atoms": atoms, "humanSide": "client" })).await;
    assert_eq!(state["terminated"], true);
    assert_eq!(state["history"], json!(["x"]));

    let atoms = json!({ "a": { "turn": "s" } });
    let (id, state) = create(&app, json!({ "formula": "a", "atoms": atoms, "humanSide": "client" })).await;
    assert_eq!(state["terminated"], false);
    assert_eq!(state["stuckSide"], "server");
    let (status, _) = call(&app, "POST", &format!("/session/{id}/move"), Some(json!({ "move": "x" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn solve_endpoint_reports_the_winner() {
    let app = router(ServiceConfig::default());
    let (status, v) = call(&app, "POST", "/solve", Some(json!({ "formula": "a^ + a" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({ "winner": "server" }));

    let (status, v) = call(&app, "POST", "/solve", Some(json!({ "formula": "0" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["winner"], "client");

    let (status, _) = call(&app, "POST", "/solve", Some(json!({ "formula": "a +" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn tree_endpoint_walks_paths() {
    let app = router(ServiceConfig::default());
    let q = "formula=(a%20%26%20b)%20%2B%20c";
    let (status, v) = call(&app, "GET", &format!("/game/tree?{q}"), None).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["turn"], "s");
    assert_eq!(v["moves"], json!(["L", "R"]));

    let (_, v) = call(&app, "GET", &format!("/game/tree?{q}&path=L"), None).await;
    assert_eq!(v["turn"], "c");
    let (_, v) = call(&app, "GET", &format!("/game/tree?{q}&path=L,R"), None).await;
    assert_eq!(v["turn"], "t");
    assert_eq!(v["moves"], json!([]));

    let (status, _) = call(&app, "GET", &format!("/game/tree?{q}&path=Q"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}
