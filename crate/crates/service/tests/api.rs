use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use evbox_core::engine::{execute_pipeline, Action, PipelineConfig};
use evbox_service::{router, AppState, STATE_VERSION_HEADER};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    version_header: Option<u64>,
    content_type: String,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let version_header =
        resp.headers().get(STATE_VERSION_HEADER).map(|v| v.to_str().unwrap().parse().unwrap());
    let content_type =
        resp.headers().get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    Reply { status, version_header, content_type, text: String::from_utf8(bytes.to_vec()).unwrap() }
}

async fn session(app: &Router) -> String {
    let r = call(app, "POST", "/sessions", None).await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["state_version"], 0);
    r.json()["session_id"].as_str().unwrap().to_string()
}

async fn act(app: &Router, id: &str, body: Value) -> Reply {
    call(app, "POST", &format!("/sessions/{id}/actions"), Some(body)).await
}

fn synthetic(n: usize) -> Value {
    json!({ "action": "synthetic", "params": { "n_sequences": n, "seed": 4 } })
}

#[tokio::test]
async fn session_flow_and_versions() {
    let app = router(AppState::default());
    let id = session(&app).await;

    let mut s = synthetic(150);
    s["expected_state_version"] = json!(0);
    let r = act(&app, &id, s).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["state_version"], 1);

    let r = act(&app, &id, json!({ "action": "cluster", "params": { "k": 3 }, "expected_state_version": 1 })).await;
    assert_eq!(r.json()["state_version"], 2);

    // A write against an old version is rejected and changes nothing.
    let r = act(&app, &id, json!({ "action": "cluster", "params": { "k": 4 }, "expected_state_version": 1 })).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["error"]["code"], "ConflictError");
    assert_eq!(r.json()["error"]["details"]["state_version"], 2);

    // Reads posted as actions keep the version.
    let r = act(&app, &id, json!({ "action": "build_eventbox", "params": { "event_type": "scan" } })).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["state_version"], 2);
    assert!(r.json()["result"]["n"].as_u64().unwrap() > 0);

    let r = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(r.json()["state_version"], 2);
    assert_eq!(r.json()["clustered"], 3);

    let r = act(&app, &id, json!({ "action": "undo" })).await;
    assert_eq!(r.json()["state_version"], 3);
    let r = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    let log = r.json();
    let names: Vec<&str> = log["actions"].as_array().unwrap().iter().map(|a| a["action"].as_str().unwrap()).collect();
    assert_eq!(names, ["synthetic", "cluster", "undo"]);
}

#[tokio::test]
async fn errors_carry_codes() {
    let app = router(AppState::default());
    let id = session(&app).await;

    let r = act(&app, &id, json!({ "action": "cluster", "params": { "k": 2 } })).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["code"], "StateError");

    act(&app, &id, synthetic(40)).await;
    let r = act(&app, &id, json!({ "action": "select_query", "params": { "query": "age > " } })).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["code"], "ParseError");
    assert_eq!(r.json()["error"]["details"]["position"], 6);

    let r = act(&app, &id, json!({ "action": "select_query", "params": { "query": "ward = 'x'" } })).await;
    assert_eq!(r.json()["error"]["code"], "NameError");

    let r = act(&app, &id, json!({ "action": "teleport" })).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["code"], "ConfigError");

    let r = call(&app, "GET", "/sessions/00000000-0000-0000-0000-000000000000/state", None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    let r = call(&app, "GET", &format!("/sessions/{id}/panels/sankey"), None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn read_endpoints_carry_state_version() {
    let app = router(AppState::default());
    let id = session(&app).await;
    act(&app, &id, synthetic(120)).await;
    act(&app, &id, json!({ "action": "cluster", "params": { "k": 3 } })).await;

    let r = call(&app, "GET", &format!("/sessions/{id}/eventbox?event_type=consult&b=day_of_week"), None).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["state_version"], 2);
    assert_eq!(r.version_header, Some(2));
    let n = r.json()["eventbox"]["n"].as_u64().unwrap();

    let r = call(&app, "GET", &format!("/sessions/{id}/eventbox?event_type=consult&b=day_of_week&breakdown=true"), None)
        .await;
    let children = r.json()["children"].as_array().unwrap().clone();
    assert_eq!(children.iter().map(|c| c["n"].as_u64().unwrap()).sum::<u64>(), n);
    assert_eq!(children[0]["breakdown_value"], "Mon");

    let r = call(&app, "GET", &format!("/sessions/{id}/eventbox?event_type=consult&b=day_of_week&merge=Mon,Tue"), None)
        .await;
    let merged = r.json()["eventbox"]["n"].as_u64().unwrap();
    assert_eq!(merged, children[0]["n"].as_u64().unwrap() + children[1]["n"].as_u64().unwrap());

    let r = call(&app, "GET", &format!("/sessions/{id}/eventbox?event_type=consult&format=svg"), None).await;
    assert_eq!(r.content_type, "image/svg+xml");
    assert!(r.text.starts_with("<svg"));
    assert_eq!(r.version_header, Some(2));

    let q = "continuous=duration&categorical=urgency,clinic&response=duration&event_type=consult";
    let r = call(&app, "GET", &format!("/sessions/{id}/report?{q}"), None).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["state_version"], 2);
    assert_eq!(r.json()["report"]["anova"]["response"], "duration");
    let r = call(&app, "GET", &format!("/sessions/{id}/report?format=md&{q}"), None).await;
    assert!(r.content_type.starts_with("text/markdown"));
    assert_eq!(r.version_header, Some(2));

    for kind in ["events", "clusters", "unique", "individual", "attributes"] {
        let r = call(&app, "GET", &format!("/sessions/{id}/panels/{kind}?limit=5"), None).await;
        assert_eq!(r.status, StatusCode::OK, "{kind}: {}", r.text);
        assert_eq!(r.json()["state_version"], 2, "{kind}");
    }
    let r = call(&app, "GET", &format!("/sessions/{id}/panels/individual?offset=118&limit=5"), None).await;
    assert_eq!(r.json()["rows"].as_array().unwrap().len(), 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn one_writer_wins_per_version() {
    let app = router(AppState::default());
    let id = session(&app).await;
    act(&app, &id, synthetic(60)).await;
    let mut tasks = Vec::new();
    for k in 2..10 {
        let (app, id) = (app.clone(), id.clone());
        tasks.push(tokio::spawn(async move {
            act(&app, &id, json!({ "action": "cluster", "params": { "k": k }, "expected_state_version": 1 })).await.status
        }));
    }
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 1);
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count(), 7);
    let r = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(r.json()["state_version"], 2);
}

#[tokio::test]
async fn service_and_pipeline_agree_on_reports() {
    let actions = json!([
        { "action": "synthetic", "params": { "n_sequences": 200, "seed": 9 } },
        { "action": "cluster", "params": { "k": 3 } },
        { "action": "select_query", "params": { "query": "(Cluster ID = C1) OR (age > 50)" } }
    ]);
    let report = json!({ "continuous": ["duration", "age"], "categorical": ["urgency", "cluster"],
        "response": "duration", "factors": ["urgency", "day_of_week"], "event_type": "wait" });

    let app = router(AppState::default());
    let id = session(&app).await;
    for a in actions.as_array().unwrap() {
        assert_eq!(act(&app, &id, a.clone()).await.status, StatusCode::OK);
    }
    let r = act(&app, &id, json!({ "action": "report", "params": report })).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let from_service = r.json()["result"].clone();

    let config: PipelineConfig = serde_json::from_value(json!({
        "actions": actions,
        "outputs": [{ "kind": "report", "config": report, "json": "report.json" }]
    }))
    .unwrap();
    let run = execute_pipeline(&config, None, None).unwrap();
    let from_pipeline: Value = serde_json::from_slice(&run.artifacts[0].1).unwrap();
    assert_eq!(from_service, from_pipeline);

    // The service log replays into the same engine state as the pipeline.
    let log = call(&app, "GET", &format!("/sessions/{id}/log"), None).await.json()["actions"].clone();
    let log: Vec<Action> = serde_json::from_value(log).unwrap();
    assert_eq!(log, run.engine.log());
}
