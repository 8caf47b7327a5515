use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cyberrel::bootstrap::{load_seeds, run_pipeline, BootstrapConfig, PipelineOutput};
use cyberrel::corpus::{load_corpus, CorpusFormat};
use cyberrel::entity::Gazetteers;
use cyberrel::oracle::{OracleQuery, OracleQueue, QueryKind, RunSnapshot, Service};
use cyberrel::relation::RelationKind;
use cyberrel_cli::service::router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri).header("origin", "http://localhost:5173");
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn query(id: &str) -> OracleQuery {
    OracleQuery::new(id, QueryKind::Relation, "is_vendor_of", format!("rel:is_vendor_of:a:{id}"), "(a, is_vendor_of, b)", 1)
}

#[tokio::test]
async fn empty_queue_and_unknown_ids() {
    let app = router(OracleQueue::new(), None);
    assert_eq!(call(&app, "GET", "/api/queries/pending", None).await, (StatusCode::OK, Value::Array(vec![])));
    let (status, body) = call(&app, "POST", "/api/queries/nope/answer", Some(r#"{"answer":"yes"}"#)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("nope"));
    let (status, body) = call(&app, "GET", "/api/state", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<RunSnapshot>(body).unwrap(), RunSnapshot::default());
}

#[tokio::test]
async fn answering_moves_a_query_out_of_pending() {
    let queue = OracleQueue::new();
    queue.enqueue(vec![query("q1"), query("q2")]).unwrap();
    let app = router(queue.clone(), None);
    let (_, pending) = call(&app, "GET", "/api/queries/pending", None).await;
    let ids: Vec<&str> = pending.as_array().unwrap().iter().map(|q| q["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["q1", "q2"]);

    let (status, body) = call(&app, "POST", "/api/queries/q1/answer", Some(r#"{"answer":"dont_know"}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((body["status"].as_str(), body["answer"].as_str()), (Some("answered"), Some("dont_know")));
    let (_, pending) = call(&app, "GET", "/api/queries/pending", None).await;
    assert_eq!(pending.as_array().unwrap().len(), 1);

    let (status, _) = call(&app, "POST", "/api/queries/q1/answer", Some(r#"{"answer":"no"}"#)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/api/queries/q2/answer", Some(r#"{"answer":"maybe"}"#)).await;
    assert!(status.is_client_error());
    assert_eq!(queue.pending_count(), 1);
}

#[tokio::test]
async fn cors_and_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>queue</h1>").unwrap();
    let app = router(OracleQueue::new(), Some(dir.path()));
    let req = Request::builder()
        .uri("/api/queries/pending")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.headers()["access-control-allow-origin"], "*");
    let res = app.clone().oneshot(Request::builder().uri("/ui/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(res.into_body().collect().await.unwrap().to_bytes().as_ref(), b"<h1>queue</h1>");
}

fn spawn_two_hop(queue: OracleQueue) -> thread::JoinHandle<PipelineOutput> {
    thread::spawn(move || {
        let dir = data_dir().join("fixtures/two_hop");
        let docs = load_corpus(&dir.join("corpus"), CorpusFormat::Auto).unwrap();
        let seeds = load_seeds(&dir.join("seeds.json"), 5).unwrap();
        let gaz = Gazetteers::load_dir(&data_dir().join("gazetteers")).unwrap();
        let mut oracle = Service::new(queue, Some(Duration::from_secs(30)));
        run_pipeline(docs, &gaz, None, &seeds, &BootstrapConfig::default(), &mut oracle).unwrap()
    })
}

async fn next_pending(app: &Router) -> Option<Value> {
    let deadline = Instant::now() + Duration::from_secs(20);
    while Instant::now() < deadline {
        let (_, pending) = call(app, "GET", "/api/queries/pending", None).await;
        if let Some(q) = pending.as_array().unwrap().first() {
            return Some(q.clone());
        }
        let (_, state) = call(app, "GET", "/api/state", None).await;
        if state["finished"] == Value::Bool(true) {
            return None;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("no query and no finished run within 20 s");
}

#[tokio::test(flavor = "multi_thread")]
async fn yes_answer_shows_as_top_score_in_state() {
    let queue = OracleQueue::new();
    let app = router(queue.clone(), None);
    let run = spawn_two_hop(queue);

    let first = next_pending(&app).await.expect("a query");
    assert!(!first["context"].as_array().unwrap().is_empty());
    let key = first["candidate_key"].as_str().unwrap().to_string();
    let id = first["id"].as_str().unwrap();
    let (status, _) = call(&app, "POST", &format!("/api/queries/{id}/answer"), Some(r#"{"answer":"yes"}"#)).await;
    assert_eq!(status, StatusCode::OK);

    let mut seen = false;
    let deadline = Instant::now() + Duration::from_secs(20);
    while !seen && Instant::now() < deadline {
        let (_, state) = call(&app, "GET", "/api/state", None).await;
        seen = state["relations"]["is_vendor_of"]["scores"][&key].as_f64() == Some(1000.0);
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    assert!(seen, "{key} never reported at 1000");

    let mut rejected = Vec::new();
    while let Some(q) = next_pending(&app).await {
        let id = q["id"].as_str().unwrap();
        rejected.push(q["candidate_key"].as_str().unwrap().to_string());
        call(&app, "POST", &format!("/api/queries/{id}/answer"), Some(r#"{"answer":"no"}"#)).await;
    }
    let out = run.join().unwrap();
    let state = &out.states[&RelationKind::IsVendorOf];
    assert_eq!(state.answers[&key].name(), "yes");
    for k in &rejected {
        assert!(!state.known_relations.contains_key(k) && !state.known_patterns.contains_key(k), "{k}");
    }
    let (_, snapshot) = call(&app, "GET", "/api/state", None).await;
    assert_eq!(snapshot["finished"], Value::Bool(true));
}
