//! REST front end for the runlog catalogue.
//!
//! All endpoints live under `/api/v1` and are listed in [`routes::ROUTES`],
//! from which both the router and the OpenAPI document at
//! `/api/v1/openapi` are generated. Requests authenticate with
//! `Authorization: Bearer <token>`; tokens map to actors in the config file.

pub mod config;
pub mod error;
pub mod extract;
pub mod handlers;
pub mod openapi;
pub mod routes;
pub mod wire;

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Request, State};
use axum::http::header::AUTHORIZATION;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{on, MethodFilter, MethodRouter};
use axum::Router;
use runlog_core::domain::ActorRef;
use runlog_core::store::StoreOptions;
use runlog_core::Store;
use serde_json::json;
use thiserror::Error;

pub use config::ServiceConfig;
pub use error::{ApiError, ErrorCode, ErrorEnvelope};
pub use routes::{Route, API_PREFIX, ROUTES};

/// Multipart framing allowance on top of the attachment size limit.
const UPLOAD_OVERHEAD: u64 = 64 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub tokens: Arc<HashMap<String, ActorRef>>,
}

impl AppState {
    pub fn new(store: Arc<Store>, tokens: HashMap<String, ActorRef>) -> Self {
        AppState { store, tokens: Arc::new(tokens) }
    }
}

fn method_filter(route: &Route) -> MethodFilter {
    match route.method {
        routes::HttpMethod::Get => MethodFilter::GET,
        routes::HttpMethod::Post => MethodFilter::POST,
        routes::HttpMethod::Patch => MethodFilter::PATCH,
        routes::HttpMethod::Delete => MethodFilter::DELETE,
    }
}

fn method_router(route: &Route, max_upload: u64) -> MethodRouter<AppState> {
    use handlers as h;
    let f = method_filter(route);
    match route.operation_id {
        "getOpenApi" => on(f, h::get_openapi),
        "getHealth" => on(f, h::get_health),
        "createFill" => on(f, h::create_fill),
        "listFills" => on(f, h::list_fills),
        "getFill" => on(f, h::get_fill),
        "listFillRuns" => on(f, h::list_fill_runs),
        "startRun" => on(f, h::start_run),
        "listRuns" => on(f, h::list_runs),
        "getRun" => on(f, h::get_run),
        "updateRun" => on(f, h::update_run),
        "tagRun" => on(f, h::tag_run),
        "untagRun" => on(f, h::untag_run),
        "createPass" => on(f, h::create_pass),
        "listPasses" => on(f, h::list_passes),
        "getPass" => on(f, h::get_pass),
        "updatePass" => on(f, h::update_pass),
        "getPassLineage" => on(f, h::get_pass_lineage),
        "createLog" => on(f, h::create_log),
        "listLogs" => on(f, h::list_logs),
        "getLog" => on(f, h::get_log),
        "editLog" => on(f, h::edit_log),
        "listLogRevisions" => on(f, h::list_log_revisions),
        "uploadAttachment" => on(f, h::upload_attachment).layer(DefaultBodyLimit::max(
            usize::try_from(max_upload.saturating_add(UPLOAD_OVERHEAD)).unwrap_or(usize::MAX),
        )),
        "getAttachment" => on(f, h::get_attachment),
        "listTemplates" => on(f, h::list_templates),
        "createTemplate" => on(f, h::create_template),
        "readAudit" => on(f, h::read_audit),
        "reportOverview" => on(f, h::report_overview),
        "reportRunsPerFill" => on(f, h::report_runs_per_fill),
        other => panic!("route table lists {other} but no handler is bound to it"),
    }
}

/// Resolves the bearer token, if any, into an [`ActorRef`] request
/// extension. A token that is present but unknown is rejected here, on every
/// route; routes that need an actor reject its absence themselves.
async fn authenticate(State(state): State<AppState>, mut req: Request, next: Next) -> Response {
    if let Some(value) = req.headers().get(AUTHORIZATION) {
        let token = value.to_str().ok().and_then(|v| v.strip_prefix("Bearer ")).map(str::trim);
        match token.and_then(|t| state.tokens.get(t)) {
            Some(actor) => {
                let actor = actor.clone();
                req.extensions_mut().insert(actor);
            }
            None => return ApiError::unauthorized("unknown bearer token").into_response(),
        }
    }
    next.run(req).await
}

async fn no_route(req: Request) -> ApiError {
    ApiError::not_found(format!("no route for {} {}", req.method(), req.uri().path()))
        .with_detail(json!({ "route": null }))
}

async fn method_not_allowed(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let resp = next.run(req).await;
    if resp.status() == axum::http::StatusCode::METHOD_NOT_ALLOWED && resp.headers().get("content-type").is_none() {
        let allow = resp.headers().get(axum::http::header::ALLOW).cloned();
        let mut out = ApiError::new(
            axum::http::StatusCode::METHOD_NOT_ALLOWED,
            ErrorCode::Invalid,
            format!("{method} is not supported on {path}"),
        )
        .into_response();
        if let Some(allow) = allow {
            out.headers_mut().insert(axum::http::header::ALLOW, allow);
        }
        return out;
    }
    resp
}

/// The full application router.
pub fn app(state: AppState) -> Router {
    let max_upload = state.store.options().max_attachment_bytes;
    let mut api = Router::new();
    for route in ROUTES {
        api = api.route(route.path, method_router(route, max_upload));
    }
    Router::new()
        .nest(API_PREFIX, api)
        .fallback(no_route)
        .layer(middleware::from_fn(method_not_allowed))
        .layer(middleware::from_fn_with_state(state.clone(), authenticate))
        .with_state(state)
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("store: {0}")]
    Store(#[from] runlog_core::StoreError),
    #[error("cannot listen: {0}")]
    Io(#[from] std::io::Error),
}

/// Opens the store named in `config` and builds the application state.
pub fn state_from_config(config: &ServiceConfig) -> Result<AppState, ServeError> {
    let options = StoreOptions {
        fsync: config.fsync,
        max_attachment_bytes: config.max_upload_bytes,
        ..Default::default()
    };
    let store = Store::open(&config.store, options)?;
    Ok(AppState::new(Arc::new(store), config.token_table()?))
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app(state)).with_graceful_shutdown(shutdown).await
}

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let state = state_from_config(&config)?;
    let listener = tokio::net::TcpListener::bind(config.listen_addr()?).await?;
    eprintln!("runlog listening on http://{}{API_PREFIX}", listener.local_addr()?);
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
