mod common;

use axum::http::{header, Method, StatusCode};
use common::{TestApp, MACHINE_TOKEN, SHIFTER_TOKEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use runlog_testkit::{corpus, oracle};
use serde_json::{json, Value};

async fn fill(app: &TestApp, n: u64) -> Value {
    let r = app.post("/api/v1/fills", json!({ "fill_number": n, "beam_type": "PROTON-PROTON" })).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.bytes));
    r.json()
}

async fn run(app: &TestApp, body: Value) -> u64 {
    let r = app.post("/api/v1/runs", body).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.bytes));
    r.json()["run_number"].as_u64().unwrap()
}

async fn log(app: &TestApp, body: Value) -> u64 {
    let r = app.post("/api/v1/logs", body).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.bytes));
    r.json()["log_id"].as_u64().unwrap()
}

#[tokio::test]
async fn health_and_description_need_no_token() {
    let app = TestApp::new();
    let r = app.call(Method::GET, "/api/v1/health", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["store"]["reachable"], true);
    assert_eq!(app.call(Method::GET, "/api/v1/openapi", None, None).await.status, StatusCode::OK);
    app.check_traffic();
}

#[tokio::test]
async fn fill_runs_and_lookups() {
    let app = TestApp::new();
    fill(&app, 7).await;
    for _ in 0..3 {
        run(&app, json!({ "run_type": "GLOBAL", "fill_number": 7 })).await;
    }
    run(&app, json!({ "run_type": "COSMICS" })).await;
    let page = app.get("/api/v1/fills/7/runs").await.json();
    assert_eq!(page["total"], 3);
    assert!(page["items"].as_array().unwrap().iter().all(|r| r["fill_number"] == 7));

    let missing = app.get("/api/v1/fills/999").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.code(), "NOT_FOUND");
    assert_eq!(app.get("/api/v1/fills/999/runs").await.status, StatusCode::NOT_FOUND);

    let dup = app.post("/api/v1/fills", json!({ "fill_number": 7 })).await;
    assert_eq!(dup.status, StatusCode::CONFLICT);
    assert_eq!(dup.code(), "CONFLICT");

    let bad_fill = app.post("/api/v1/runs", json!({ "run_type": "GLOBAL", "fill_number": 8 })).await;
    assert_eq!(bad_fill.status, StatusCode::NOT_FOUND);
    assert_eq!(bad_fill.json()["detail"]["reference"], "FILL:8");

    assert_eq!(app.get("/api/v1/fills").await.json()["total"], 1);
    app.check_traffic();
}

#[tokio::test]
async fn run_lifecycle() {
    let app = TestApp::new();
    let r = app.post("/api/v1/runs", json!({ "run_type": "GLOBAL", "tags": ["TPC"] })).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let body = r.json();
    assert_eq!(body["run_number"], 1);
    assert_eq!(body["state"], "ONGOING");
    assert_eq!(body["tags"], json!(["tpc"]));

    let end = app.patch("/api/v1/runs/1", json!({ "event": "END" })).await;
    assert_eq!(end.status, StatusCode::OK);
    assert_eq!(end.json()["state"], "ENDED");
    let again = app.patch("/api/v1/runs/1", json!({ "event": "END" })).await;
    assert_eq!(again.status, StatusCode::CONFLICT);

    let q = app.patch("/api/v1/runs/1", json!({ "event": "SET_QUALITY", "quality": "GOOD" })).await;
    assert_eq!(q.json()["quality"], "GOOD");
    let bad = app.patch("/api/v1/runs/1", json!({ "event": "EXPLODE" })).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.code(), "INVALID");

    let tagged = app.post("/api/v1/runs/1/tags", json!({ "tag": "cosmics" })).await;
    assert_eq!(tagged.json()["tags"], json!(["cosmics", "tpc"]));
    let untagged = app.delete("/api/v1/runs/1/tags/tpc").await;
    assert_eq!(untagged.json()["tags"], json!(["cosmics"]));
    assert_eq!(app.delete("/api/v1/runs/1/tags/tpc").await.status, StatusCode::NOT_FOUND);
    assert_eq!(app.get("/api/v1/runs/2").await.status, StatusCode::NOT_FOUND);
    assert_eq!(app.get("/api/v1/runs/abc").await.status, StatusCode::BAD_REQUEST);

    let early = app.post("/api/v1/runs", json!({ "run_type": "GLOBAL", "start_time": "2022-01-01T10:00:00Z" })).await;
    let n = early.json()["run_number"].as_u64().unwrap();
    let before = app.patch(&format!("/api/v1/runs/{n}"), json!({ "event": "END", "end_time": "2022-01-01T09:00:00Z" })).await;
    assert_eq!(before.status, StatusCode::UNPROCESSABLE_ENTITY);
    app.check_traffic();
}

#[tokio::test]
async fn passes_and_lineage() {
    let app = TestApp::new();
    fill(&app, 3).await;
    run(&app, json!({ "run_type": "GLOBAL", "fill_number": 3 })).await;
    let mut input = json!({ "kind": "RUN", "id": 1 });
    for i in 0..3 {
        let r = app.post("/api/v1/passes", json!({ "name": format!("apass{i}"), "input": input })).await;
        assert_eq!(r.status, StatusCode::CREATED);
        input = json!({ "kind": "PASS", "id": r.json()["pass_id"] });
    }
    let lineage = app.get("/api/v1/passes/3/lineage").await.json();
    let chain = lineage["chain"].as_array().unwrap();
    assert_eq!(chain.len(), 4);
    assert_eq!(chain[3], json!({ "kind": "RUN", "id": 1 }));
    assert_eq!(chain[0], json!({ "kind": "PASS", "id": 3 }));

    let on_fill = app.post("/api/v1/passes", json!({ "name": "x", "input": { "kind": "FILL", "id": 3 } })).await;
    assert_eq!(on_fill.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(on_fill.code(), "INVALID");
    let dangling = app.post("/api/v1/passes", json!({ "name": "x", "input": { "kind": "PASS", "id": 99 } })).await;
    assert_eq!(dangling.status, StatusCode::NOT_FOUND);

    assert_eq!(app.patch("/api/v1/passes/1", json!({ "status": "RUNNING" })).await.status, StatusCode::OK);
    let done = app.patch("/api/v1/passes/1", json!({ "status": "DONE" })).await;
    assert_eq!(done.status, StatusCode::OK);
    assert_eq!(done.json()["status"], "DONE");
    assert_eq!(app.patch("/api/v1/passes/1", json!({ "status": "RUNNING" })).await.status, StatusCode::CONFLICT);

    let listed = app.get("/api/v1/passes?status=DONE").await.json();
    assert_eq!(listed["total"], 1);
    let by_input = app.get("/api/v1/passes?input=PASS:1").await.json();
    assert_eq!(by_input["items"][0]["pass_id"], 2);
    assert_eq!(app.get("/api/v1/passes/9/lineage").await.status, StatusCode::NOT_FOUND);
    app.check_traffic();
}

#[tokio::test]
async fn logs_templates_and_revisions() {
    let app = TestApp::new();
    run(&app, json!({ "run_type": "GLOBAL" })).await;
    let t = app
        .post(
            "/api/v1/templates",
            json!({
                "template_name": "eos",
                "title_pattern": "End of shift {{shift}}",
                "body_pattern": "Runs {{runs}}",
                "required_fields": ["shift", "runs"],
                "default_tags": ["eos"],
            }),
        )
        .await;
    assert_eq!(t.status, StatusCode::CREATED);
    let dup = app.post("/api/v1/templates", json!({ "template_name": "eos", "title_pattern": "", "body_pattern": "" })).await;
    assert_eq!(dup.status, StatusCode::CONFLICT);

    let missing = app
        .post("/api/v1/logs", json!({ "template_name": "eos", "values": { "shift": "night" } }))
        .await;
    assert_eq!(missing.status, StatusCode::BAD_REQUEST);
    assert_eq!(missing.json()["detail"]["field"], "runs");

    let id = log(
        &app,
        json!({
            "template_name": "eos",
            "values": { "shift": "night", "runs": "1" },
            "associations": [{ "kind": "RUN", "id": 1 }],
        }),
    )
    .await;
    let entry = app.get(&format!("/api/v1/logs/{id}")).await.json();
    assert_eq!(entry["title"], "End of shift night");
    assert_eq!(entry["tags"], json!(["eos"]));
    assert_eq!(entry["origin"], "HUMAN");

    let both = app.post("/api/v1/logs", json!({ "title": "a", "template_name": "eos" })).await;
    assert_eq!(both.status, StatusCode::BAD_REQUEST);

    let edited = app.patch(&format!("/api/v1/logs/{id}"), json!({ "body": "Runs 1 and 2" })).await;
    assert_eq!(edited.json()["body"], "Runs 1 and 2");
    let revisions = app.get(&format!("/api/v1/logs/{id}/revisions")).await.json();
    assert_eq!(revisions.as_array().unwrap().len(), 2);
    assert_eq!(revisions[0]["body"], "Runs 1");
    assert_eq!(app.patch(&format!("/api/v1/logs/{id}"), json!({})).await.status, StatusCode::UNPROCESSABLE_ENTITY);

    let machine = app
        .call(Method::POST, "/api/v1/logs", Some(MACHINE_TOKEN), Some(json!({ "title": "HV trip", "body": "TPC sector 4" })))
        .await;
    assert_eq!(machine.json()["origin"], "PROCESS");
    assert_eq!(machine.json()["author"]["actor_id"], "daq");

    let found = app.get("/api/v1/logs?text=hv%20TPC").await.json();
    assert_eq!(found["total"], 1);
    let found = app.get("/api/v1/logs?text=eos+tpc").await.json();
    assert_eq!(found["total"], 0);
    let by_run = app.get("/api/v1/logs?association=RUN:1").await.json();
    assert_eq!(by_run["total"], 1);
    let by_author = app.get("/api/v1/logs?author=daq").await.json();
    assert_eq!(by_author["total"], 1);
    assert_eq!(app.get("/api/v1/templates").await.json()["total"], 1);
    app.check_traffic();
}

#[tokio::test]
async fn attachments_round_trip() {
    let app = TestApp::new();
    let id = log(&app, json!({ "title": "plot", "body": "see attached" })).await;
    let bytes: Vec<u8> = (0..=255u8).cycle().take(10_000).collect();
    let up = app.upload(id, "rate.png", "image/png", &bytes).await;
    assert_eq!(up.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&up.bytes));
    let meta = up.json();
    assert_eq!(meta["size_bytes"], 10_000);
    let digest = meta["digest"].as_str().unwrap();
    let down = app.get(&format!("/api/v1/attachments/{digest}")).await;
    assert_eq!(down.status, StatusCode::OK);
    assert_eq!(down.bytes, bytes);
    assert_eq!(down.headers[header::CONTENT_TYPE], "image/png");
    assert_eq!(app.get(&format!("/api/v1/logs/{id}")).await.json()["attachments"][0]["filename"], "rate.png");

    let missing = app.get(&format!("/api/v1/attachments/{}", "a".repeat(64))).await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(app.upload(99, "x", "text/plain", b"x").await.status, StatusCode::NOT_FOUND);
    app.check_traffic();
}

#[tokio::test]
async fn oversized_upload_is_413() {
    let store = runlog_core::Store::in_memory(runlog_core::StoreOptions {
        max_attachment_bytes: 1024,
        ..common::store_options()
    });
    let app = TestApp::with_store(store);
    let id = log(&app, json!({ "title": "big", "body": "" })).await;
    let r = app.upload(id, "big.bin", "application/octet-stream", &[7u8; 1025]).await;
    assert_eq!(r.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(r.code(), "TOO_LARGE");
    // far beyond the limit the body is cut off while streaming
    let r = app.upload(id, "huge.bin", "application/octet-stream", &vec![7u8; 512 * 1024]).await;
    assert_eq!(r.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(r.code(), "TOO_LARGE");
    assert_eq!(app.store.blob_count(), 0);
    app.check_traffic();
}

#[tokio::test]
async fn bad_tokens_are_rejected_without_effect() {
    let app = TestApp::new();
    run(&app, json!({ "run_type": "GLOBAL" })).await;
    let before = app.audit_count();
    let attempts: Vec<(Method, &str, Option<Value>)> = vec![
        (Method::POST, "/api/v1/runs", Some(json!({ "run_type": "GLOBAL" }))),
        (Method::POST, "/api/v1/fills", Some(json!({ "fill_number": 1 }))),
        (Method::PATCH, "/api/v1/runs/1", Some(json!({ "event": "END" }))),
        (Method::POST, "/api/v1/logs", Some(json!({ "title": "t", "body": "b" }))),
        (Method::POST, "/api/v1/templates", Some(json!({ "template_name": "t", "title_pattern": "", "body_pattern": "" }))),
        (Method::DELETE, "/api/v1/runs/1/tags/x", None),
        (Method::GET, "/api/v1/runs", None),
        (Method::GET, "/api/v1/audit", None),
    ];
    for (method, uri, body) in attempts {
        for token in [None, Some("wrong")] {
            let r = app.call(method.clone(), uri, token, body.clone()).await;
            assert_eq!(r.status, StatusCode::UNAUTHORIZED, "{method} {uri} {token:?}");
            assert_eq!(r.code(), "UNAUTHORIZED");
        }
    }
    // unknown tokens are refused even where no token is needed
    assert_eq!(app.call(Method::GET, "/api/v1/health", Some("wrong"), None).await.status, StatusCode::UNAUTHORIZED);
    assert_eq!(app.audit_count(), before);
    app.check_traffic();
}

#[tokio::test]
async fn reads_leave_the_audit_trail_alone() {
    let app = TestApp::new();
    fill(&app, 1).await;
    run(&app, json!({ "run_type": "GLOBAL", "fill_number": 1 })).await;
    log(&app, json!({ "title": "t", "body": "b", "associations": [{ "kind": "FILL", "id": 1 }] })).await;
    let before = app.audit_count();
    for uri in [
        "/api/v1/runs",
        "/api/v1/runs/1",
        "/api/v1/fills",
        "/api/v1/fills/1",
        "/api/v1/fills/1/runs",
        "/api/v1/logs",
        "/api/v1/logs/1",
        "/api/v1/logs/1/revisions",
        "/api/v1/passes",
        "/api/v1/templates",
        "/api/v1/audit?since=0",
        "/api/v1/reports/overview",
        "/api/v1/reports/runs-per-fill",
        "/api/v1/health",
        "/api/v1/openapi",
    ] {
        assert_eq!(app.get(uri).await.status, StatusCode::OK, "{uri}");
    }
    assert_eq!(app.audit_count(), before);
    let audit = app.get("/api/v1/audit?since=0").await.json();
    assert_eq!(audit["total"], 3);
    assert_eq!(audit["items"][2]["action"], "CREATE_LOG");
    let tail = app.get("/api/v1/audit?since=2&limit=5").await.json();
    assert_eq!(tail["items"].as_array().unwrap().len(), 1);
    app.check_traffic();
}

#[tokio::test]
async fn bad_query_parameters_are_400() {
    let app = TestApp::new();
    for uri in [
        "/api/v1/runs?limit=0",
        "/api/v1/runs?limit=1001",
        "/api/v1/runs?limit=x",
        "/api/v1/runs?from=yesterday",
        "/api/v1/runs?type=PHYSICS",
        "/api/v1/runs?run_min=5&run_max=2",
        "/api/v1/runs?colour=red",
        "/api/v1/runs?tags=a&tags=b",
        "/api/v1/logs?association=LOG:1",
        "/api/v1/logs?association=nonsense",
        "/api/v1/reports/overview?format=xml",
        "/api/v1/reports/overview?from=2022-02-01T00:00:00Z&to=2022-01-01T00:00:00Z",
    ] {
        let r = app.get(uri).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(r.code(), "INVALID", "{uri}");
    }
    let r = app.get("/api/v1/runs?colour=red").await;
    assert_eq!(r.json()["detail"]["param"], "colour");
    let r = app.call(Method::POST, "/api/v1/runs", Some(SHIFTER_TOKEN), Some(json!({ "run_type": "GLOBAL", "extra": 1 }))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    app.check_traffic();
}

#[tokio::test]
async fn reports_in_json_and_csv() {
    let app = TestApp::new();
    fill(&app, 7).await;
    fill(&app, 8).await;
    for (f, start) in [(7, "2022-07-05T00:00:00Z"), (7, "2022-07-05T01:00:00Z"), (7, "2022-07-05T02:00:00Z"), (8, "2022-07-06T00:00:00Z")] {
        run(&app, json!({ "run_type": "GLOBAL", "fill_number": f, "start_time": start })).await;
    }
    app.patch("/api/v1/runs/1", json!({ "event": "END", "end_time": "2022-07-05T00:05:00Z" })).await;
    app.patch("/api/v1/runs/2", json!({ "event": "END", "end_time": "2022-07-05T03:00:00Z" })).await;
    let rows = app.get("/api/v1/reports/runs-per-fill").await.json();
    assert_eq!(rows, json!([{ "fill_number": 7, "run_count": 3 }, { "fill_number": 8, "run_count": 1 }]));
    let overview = app.get("/api/v1/reports/overview").await.json();
    assert_eq!(overview["run_count"], 4);
    assert_eq!(overview["mean_runs_per_fill"], 2.0);
    let counts: Vec<u64> = overview["duration_histogram"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![1, 0, 1, 0, 0]);

    let ranged = app.get("/api/v1/reports/overview?from=2022-07-05T00:00:00Z&to=2022-07-05T02:00:00Z").await.json();
    assert_eq!(ranged["run_count"], 2);

    let csv = app.get("/api/v1/reports/runs-per-fill?format=csv").await;
    assert_eq!(csv.status, StatusCode::OK);
    assert!(csv.headers[header::CONTENT_TYPE].to_str().unwrap().starts_with("text/csv"));
    assert_eq!(String::from_utf8(csv.bytes.clone()).unwrap(), "fill_number,run_count\n7,3\n8,1\n");
    let csv = app.get("/api/v1/reports/overview?format=csv").await;
    assert!(String::from_utf8(csv.bytes.clone()).unwrap().contains("run_count,4\n"));
    app.check_traffic();
}

#[tokio::test]
async fn pages_cover_each_match_exactly_once() {
    let app = TestApp::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..57 {
        let new = corpus::random_new_run(&mut rng, &[]);
        run(&app, serde_json::to_value(new).unwrap()).await;
    }
    for limit in [1u32, 7, 10, 57, 100] {
        let mut seen = Vec::new();
        let mut offset = 0;
        loop {
            let page = app.get(&format!("/api/v1/runs?tags=tpc&offset={offset}&limit={limit}")).await.json();
            let items = page["items"].as_array().unwrap().clone();
            seen.extend(items.iter().map(|r| r["run_number"].as_u64().unwrap()));
            offset += limit as u64;
            if offset >= page["total"].as_u64().unwrap() {
                assert_eq!(seen.len() as u64, page["total"].as_u64().unwrap());
                break;
            }
        }
        let mut dedup = seen.clone();
        dedup.dedup();
        assert_eq!(dedup, seen);
        assert!(seen.windows(2).all(|w| w[0] > w[1]));
    }
    app.check_traffic();
}

fn query_string(q: &runlog_core::domain::RunQuery) -> String {
    let mut parts = Vec::new();
    if let Some((lo, hi)) = q.run_number_range {
        parts.push(format!("run_min={lo}&run_max={hi}"));
    }
    if let Some((from, to)) = q.time_range {
        parts.push(format!("from={from}&to={to}"));
    }
    let list = |v: Vec<String>| v.join(",");
    if let Some(t) = &q.run_types {
        parts.push(format!("type={}", list(t.iter().map(|x| x.to_string()).collect())));
    }
    if let Some(t) = &q.qualities {
        parts.push(format!("quality={}", list(t.iter().map(|x| x.to_string()).collect())));
    }
    if let Some(t) = &q.states {
        parts.push(format!("state={}", list(t.iter().map(|x| x.to_string()).collect())));
    }
    if let Some(f) = q.fill_number {
        parts.push(format!("fill={f}"));
    }
    if let Some(t) = &q.tags_all {
        parts.push(format!("tags={}", list(t.iter().map(|x| x.to_string()).collect())));
    }
    parts.join("&")
}

#[tokio::test]
async fn run_search_over_http_matches_brute_force() {
    let app = TestApp::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fills: Vec<u64> = (1..=6).collect();
    for &f in &fills {
        fill(&app, f).await;
    }
    for _ in 0..120 {
        let new = corpus::random_new_run(&mut rng, &fills);
        let n = run(&app, serde_json::to_value(&new).unwrap()).await;
        for e in corpus::random_run_events(&mut rng, new.start_time.unwrap()) {
            let body = match e {
                runlog_core::domain::RunEvent::End { end_time } => json!({ "event": "END", "end_time": end_time }),
                runlog_core::domain::RunEvent::SetQuality { quality } => json!({ "event": "SET_QUALITY", "quality": quality }),
                _ => unreachable!(),
            };
            assert_eq!(app.patch(&format!("/api/v1/runs/{n}"), body).await.status, StatusCode::OK);
        }
    }
    let all: Vec<_> = app.store.snapshot().runs.values().cloned().collect();
    for _ in 0..30 {
        let q = corpus::random_run_query(&mut rng, 120, &fills);
        let offset = rng.random_range(0..10u64);
        let limit = rng.random_range(1..=50u32);
        let uri = format!("/api/v1/runs?{}&offset={offset}&limit={limit}", query_string(&q));
        let page = app.get(&uri).await;
        assert_eq!(page.status, StatusCode::OK, "{uri}");
        let page = page.json();
        let (expected, total) = oracle::page(&all, |r| oracle::run_matches(r, &q), |r| r.run_number, offset, limit);
        assert_eq!(page["total"], total, "{uri}");
        assert_eq!(page["items"], serde_json::to_value(&expected).unwrap(), "{uri}");
    }
    app.check_traffic();
}
