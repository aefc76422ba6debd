#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use runlog_core::clock::SteppingClock;
use runlog_core::domain::{ActorRef, Role};
use runlog_core::store::StoreOptions;
use runlog_core::Store;
use runlog_service::routes::{HttpMethod, Route};
use runlog_service::{app, openapi, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const SHIFTER_TOKEN: &str = "shifter-token";
pub const MACHINE_TOKEN: &str = "daq-token";

#[derive(Debug, Clone)]
pub struct Exchange {
    pub method: Method,
    pub path: String,
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes)
            .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.bytes)))
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_string()
    }
}

pub struct TestApp {
    pub store: Arc<Store>,
    router: Router,
    pub traffic: Arc<Mutex<Vec<Exchange>>>,
}

pub fn store_options() -> StoreOptions {
    StoreOptions {
        fsync: false,
        clock: Arc::new(SteppingClock::new(runlog_testkit::corpus::ts(0), 1_000)),
        ..Default::default()
    }
}

pub fn tokens() -> HashMap<String, ActorRef> {
    let mut t = HashMap::new();
    t.insert(SHIFTER_TOKEN.to_string(), ActorRef::new("alice", Role::Shifter).unwrap());
    t.insert(MACHINE_TOKEN.to_string(), ActorRef::new("daq", Role::Machine).unwrap());
    t
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_store(Store::in_memory(store_options()))
    }

    pub fn with_store(store: Store) -> Self {
        let store = Arc::new(store);
        let router = app(AppState::new(store.clone(), tokens()));
        TestApp { store, router, traffic: Arc::new(Mutex::new(Vec::new())) }
    }

    pub async fn send(&self, req: Request<Body>) -> Reply {
        let method = req.method().clone();
        let path = req.uri().path().to_string();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
        self.traffic.lock().unwrap().push(Exchange {
            method,
            path,
            status,
            content_type: headers.get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string()),
            body: bytes.clone(),
        });
        Reply { status, headers, bytes }
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        };
        self.send(req.unwrap()).await
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.call(Method::GET, uri, Some(SHIFTER_TOKEN), None).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> Reply {
        self.call(Method::POST, uri, Some(SHIFTER_TOKEN), Some(body)).await
    }

    pub async fn patch(&self, uri: &str, body: Value) -> Reply {
        self.call(Method::PATCH, uri, Some(SHIFTER_TOKEN), Some(body)).await
    }

    pub async fn delete(&self, uri: &str) -> Reply {
        self.call(Method::DELETE, uri, Some(SHIFTER_TOKEN), None).await
    }

    pub async fn upload(&self, log_id: u64, filename: &str, media_type: &str, bytes: &[u8]) -> Reply {
        let boundary = "XrunlogBoundaryX";
        let mut body = Vec::new();
        body.extend_from_slice(
            format!(
                "--{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{filename}\"\r\nContent-Type: {media_type}\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
        let req = Request::builder()
            .method(Method::POST)
            .uri(format!("/api/v1/logs/{log_id}/attachments"))
            .header(header::AUTHORIZATION, format!("Bearer {SHIFTER_TOKEN}"))
            .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={boundary}"))
            .body(Body::from(body))
            .unwrap();
        self.send(req).await
    }

    pub fn audit_count(&self) -> u64 {
        self.store.verify_audit().count
    }

    /// Validates every recorded exchange against the served document and
    /// returns how many were checked.
    pub fn check_traffic(&self) -> usize {
        let checker = ResponseChecker::new();
        let traffic = self.traffic.lock().unwrap();
        for x in traffic.iter() {
            checker.check(x);
        }
        traffic.len()
    }
}

pub fn match_route(method: &Method, path: &str) -> Option<&'static Route> {
    let method = HttpMethod::ALL.into_iter().find(|m| m.to_http() == *method)?;
    Route::matching(method, path)
}

pub struct ResponseChecker {
    doc: Value,
}

impl ResponseChecker {
    pub fn new() -> Self {
        ResponseChecker { doc: openapi::document() }
    }

    /// The documented schema for one response, wrapped so that its
    /// `#/components/...` references resolve.
    pub fn schema_for(&self, route: &Route, status: StatusCode, media: &str) -> Option<Value> {
        let op = &self.doc["paths"][route.full_path()][route.method.key()];
        let responses = &op["responses"];
        let resp = responses.get(status.as_u16().to_string()).or_else(|| responses.get("default"))?;
        let content = &resp["content"];
        let schema = content.get(media).or_else(|| content.get("*/*"))?["schema"].clone();
        let mut wrapped = json!({
            "$schema": "https://json-schema.org/draft/2020-12/schema",
            "components": self.doc["components"].clone(),
        });
        for (k, v) in schema.as_object().expect("schema object") {
            wrapped[k] = v.clone();
        }
        Some(wrapped)
    }

    pub fn check(&self, x: &Exchange) {
        let Some(route) = match_route(&x.method, &x.path) else {
            // only undocumented paths may fall through to the router fallback
            assert!(
                x.status == StatusCode::NOT_FOUND || x.status == StatusCode::METHOD_NOT_ALLOWED,
                "{} {} answered {} without a route",
                x.method,
                x.path,
                x.status
            );
            return;
        };
        let media = x.content_type.as_deref().unwrap_or("").split(';').next().unwrap().trim().to_string();
        let documented = route.status == x.status.as_u16()
            || route.errors.contains(&x.status.as_u16())
            || x.status == StatusCode::UNAUTHORIZED
            || x.status.is_server_error();
        assert!(documented, "{} {} returned undocumented status {}", x.method, x.path, x.status);
        let schema = self
            .schema_for(route, x.status, &media)
            .unwrap_or_else(|| panic!("{} {} {}: media type {media:?} is not documented", x.method, x.path, x.status));
        if media != "application/json" {
            return;
        }
        let instance: Value = serde_json::from_slice(&x.body).expect("JSON body");
        let validator = jsonschema::options()
            .should_validate_formats(true)
            .build(&schema)
            .expect("documented schema compiles");
        let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
        assert!(
            errors.is_empty(),
            "{} {} {} does not match its schema: {errors:?}\n{instance}",
            x.method,
            x.path,
            x.status
        );
    }
}

pub fn method_of(m: HttpMethod) -> Method {
    m.to_http()
}
