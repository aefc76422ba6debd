//! One handler per route-table operation.

use std::collections::BTreeSet;

use axum::body::Bytes;
use axum::extract::{Multipart, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use runlog_core::domain::{
    EntityKind, LogQuery, PassQuery, PassStatus, Quality, RunEvent, RunQuery, RunState, RunType, Tag,
    TagSet, Timestamp,
};
use runlog_core::reports;
use runlog_core::store::{NewFill, NewPass, NewRun, NewTemplate};
use serde::Serialize;

use crate::error::{ApiError, ApiResult};
use crate::extract::{Actor, Body, Params, PathArgs, QueryPairs};
use crate::openapi;
use crate::routes::{AUDIT_QUERY, LOG_QUERY, PAGING, PASS_QUERY, REPORT_QUERY, RUN_QUERY};
use crate::wire::{Health, Lineage, LogEdit, LogRequest, PassPatch, RunPatch, StoreHealth, TagRequest};
use crate::AppState;

type St = State<AppState>;

fn created<T: Serialize>(value: T) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

fn ok<T: Serialize>(value: T) -> Response {
    Json(value).into_response()
}

/// Runs a store mutation off the async workers; commits may block on fsync.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&runlog_core::Store) -> Result<T, runlog_core::StoreError> + Send + 'static,
{
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

pub async fn get_openapi() -> Response {
    ok(openapi::document())
}

pub async fn get_health(State(s): St) -> Response {
    let counts = s.store.counts();
    ok(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        store: StoreHealth { reachable: true, audit_records: counts.audit_records },
    })
}

pub async fn create_fill(State(s): St, Actor(actor): Actor, Body(new): Body<NewFill>) -> ApiResult<Response> {
    let fill = blocking(&s, move |st| st.create_fill(new, &actor)).await?;
    Ok(created(fill))
}

pub async fn list_fills(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let (offset, limit) = q.check(PAGING)?.paging()?;
    Ok(ok(s.store.list_fills(offset, limit)?))
}

pub async fn get_fill(State(s): St, _: Actor, PathArgs(n): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(s.store.get_fill(n)?))
}

pub async fn list_fill_runs(State(s): St, _: Actor, PathArgs(n): PathArgs<u64>, q: QueryPairs) -> ApiResult<Response> {
    let (offset, limit) = q.check(PAGING)?.paging()?;
    s.store.get_fill(n)?;
    let query = RunQuery { fill_number: Some(n), ..Default::default() };
    Ok(ok(s.store.list_runs(&query, offset, limit)?))
}

pub async fn start_run(State(s): St, Actor(actor): Actor, Body(new): Body<NewRun>) -> ApiResult<Response> {
    let run = blocking(&s, move |st| st.create_run(new, &actor)).await?;
    Ok(created(run))
}

fn range<T>(lo: Option<T>, hi: Option<T>, min: T, max: T) -> Option<(T, T)> {
    match (lo, hi) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(min), hi.unwrap_or(max))),
    }
}

pub fn run_query(p: &Params) -> ApiResult<RunQuery> {
    Ok(RunQuery {
        run_number_range: range(p.parse("run_min")?, p.parse("run_max")?, 0, u64::MAX),
        time_range: range(p.timestamp("from")?, p.timestamp("to")?, Timestamp::MIN, Timestamp::MAX),
        run_types: p.list::<RunType>("type")?.map(|v| v.into_iter().collect()),
        qualities: p.list::<Quality>("quality")?.map(|v| v.into_iter().collect()),
        fill_number: p.parse("fill")?,
        tags_all: p.tags("tags")?.map(|v| v.into_iter().collect::<TagSet>()),
        states: p.list::<RunState>("state")?.map(|v| v.into_iter().collect()),
    })
}

pub async fn list_runs(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let p = q.check(RUN_QUERY)?;
    let (offset, limit) = p.paging()?;
    Ok(ok(s.store.list_runs(&run_query(&p)?, offset, limit)?))
}

pub async fn get_run(State(s): St, _: Actor, PathArgs(n): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(s.store.get_run(n)?))
}

pub async fn update_run(
    State(s): St,
    Actor(actor): Actor,
    PathArgs(n): PathArgs<u64>,
    Body(patch): Body<RunPatch>,
) -> ApiResult<Response> {
    let event = patch.into_event(s.store.options().clock.now());
    let run = blocking(&s, move |st| st.mutate_run(n, event, &actor)).await?;
    Ok(ok(run))
}

pub async fn tag_run(
    State(s): St,
    Actor(actor): Actor,
    PathArgs(n): PathArgs<u64>,
    Body(req): Body<TagRequest>,
) -> ApiResult<Response> {
    let run = blocking(&s, move |st| st.mutate_run(n, RunEvent::AddTag { tag: req.tag }, &actor)).await?;
    Ok(ok(run))
}

pub async fn untag_run(State(s): St, Actor(actor): Actor, PathArgs((n, tag)): PathArgs<(u64, String)>) -> ApiResult<Response> {
    let tag = Tag::parse(&tag)?;
    let run = blocking(&s, move |st| st.mutate_run(n, RunEvent::RemoveTag { tag }, &actor)).await?;
    Ok(ok(run))
}

pub async fn create_pass(State(s): St, Actor(actor): Actor, Body(new): Body<NewPass>) -> ApiResult<Response> {
    let pass = blocking(&s, move |st| st.create_pass(new, &actor)).await?;
    Ok(created(pass))
}

pub async fn list_passes(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let p = q.check(PASS_QUERY)?;
    let (offset, limit) = p.paging()?;
    let query = PassQuery {
        statuses: p.list::<PassStatus>("status")?.map(|v| v.into_iter().collect()),
        input: p.entity_ref("input")?,
    };
    Ok(ok(s.store.list_passes(&query, offset, limit)?))
}

pub async fn get_pass(State(s): St, _: Actor, PathArgs(id): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(s.store.get_pass(id)?))
}

pub async fn update_pass(
    State(s): St,
    Actor(actor): Actor,
    PathArgs(id): PathArgs<u64>,
    Body(patch): Body<PassPatch>,
) -> ApiResult<Response> {
    let pass = blocking(&s, move |st| st.set_pass_status(id, patch.status, &actor)).await?;
    Ok(ok(pass))
}

pub async fn get_pass_lineage(State(s): St, _: Actor, PathArgs(id): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(Lineage { pass_id: id, chain: s.store.lineage(id)? }))
}

pub async fn create_log(State(s): St, Actor(actor): Actor, Body(req): Body<LogRequest>) -> ApiResult<Response> {
    let new = req.into_new_log()?;
    let log = blocking(&s, move |st| st.create_log(new, &actor)).await?;
    Ok(created(log))
}

pub fn log_query(p: &Params) -> ApiResult<LogQuery> {
    let text = p
        .raw("text")
        .map(|t| t.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|tokens| !tokens.is_empty());
    let association = p.entity_ref("association")?;
    if let Some(a) = association {
        if !matches!(a.kind, EntityKind::Run | EntityKind::Fill | EntityKind::Pass) {
            return Err(ApiError::bad_param("association", "must be a RUN, FILL or PASS"));
        }
    }
    Ok(LogQuery {
        text,
        tags_all: p.tags("tags")?.map(|v| v.into_iter().collect::<BTreeSet<_>>()),
        author: p.raw("author").map(str::to_string),
        association,
        time_range: range(p.timestamp("from")?, p.timestamp("to")?, Timestamp::MIN, Timestamp::MAX),
    })
}

pub async fn list_logs(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let p = q.check(LOG_QUERY)?;
    let (offset, limit) = p.paging()?;
    Ok(ok(s.store.list_logs(&log_query(&p)?, offset, limit)?))
}

pub async fn get_log(State(s): St, _: Actor, PathArgs(id): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(s.store.get_log(id)?))
}

pub async fn edit_log(
    State(s): St,
    Actor(actor): Actor,
    PathArgs(id): PathArgs<u64>,
    Body(edit): Body<LogEdit>,
) -> ApiResult<Response> {
    let log = blocking(&s, move |st| st.edit_log(id, edit.title, edit.body, &actor)).await?;
    Ok(ok(log))
}

pub async fn list_log_revisions(State(s): St, _: Actor, PathArgs(id): PathArgs<u64>) -> ApiResult<Response> {
    Ok(ok(s.store.get_log(id)?.revisions))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, crate::error::ErrorCode::TooLarge, e.body_text())
    } else {
        ApiError::bad_request(format!("multipart body: {}", e.body_text()))
    }
}

pub async fn upload_attachment(
    State(s): St,
    Actor(actor): Actor,
    PathArgs(id): PathArgs<u64>,
    multipart: Result<Multipart, axum::extract::multipart::MultipartRejection>,
) -> ApiResult<Response> {
    let mut multipart = multipart.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut upload: Option<(Bytes, String, String)> = None;
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        if field.name() != Some("file") {
            return Err(ApiError::bad_request(format!(
                "unexpected multipart part {:?}; send one part named \"file\"",
                field.name().unwrap_or("")
            )));
        }
        if upload.is_some() {
            return Err(ApiError::bad_request("send exactly one part named \"file\""));
        }
        let filename = field.file_name().unwrap_or("attachment").to_string();
        let media_type = field
            .content_type()
            .filter(|m| HeaderValue::from_str(m).is_ok())
            .unwrap_or("application/octet-stream")
            .to_string();
        let bytes = field.bytes().await.map_err(multipart_error)?;
        upload = Some((bytes, filename, media_type));
    }
    let (bytes, filename, media_type) =
        upload.ok_or_else(|| ApiError::bad_request("missing multipart part named \"file\""))?;
    let meta = blocking(&s, move |st| st.put_attachment(id, &bytes, &filename, &media_type, &actor)).await?;
    Ok(created(meta))
}

pub async fn get_attachment(State(s): St, _: Actor, PathArgs(digest): PathArgs<String>) -> ApiResult<Response> {
    let (bytes, meta) = s.store.get_attachment(&digest)?;
    let media = HeaderValue::from_str(&meta.media_type)
        .unwrap_or_else(|_| HeaderValue::from_static("application/octet-stream"));
    let safe_name: String = meta.filename.chars().filter(|c| !c.is_control() && *c != '"' && *c != '\\').collect();
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{safe_name}\""))
        .unwrap_or_else(|_| HeaderValue::from_static("attachment"));
    Ok(([(header::CONTENT_TYPE, media), (header::CONTENT_DISPOSITION, disposition)], bytes).into_response())
}

pub async fn list_templates(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let (offset, limit) = q.check(PAGING)?.paging()?;
    Ok(ok(s.store.list_templates(offset, limit)?))
}

pub async fn create_template(
    State(s): St,
    Actor(actor): Actor,
    Body(new): Body<NewTemplate>,
) -> ApiResult<Response> {
    let template = blocking(&s, move |st| st.create_template(new, &actor)).await?;
    Ok(created(template))
}

pub async fn read_audit(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let p = q.check(AUDIT_QUERY)?;
    let since = p.parse::<u64>("since")?.unwrap_or(0);
    let (_, limit) = p.paging()?;
    Ok(ok(s.store.read_audit(since, limit)?))
}

struct ReportArgs {
    from: Timestamp,
    to: Timestamp,
    csv: bool,
}

fn report_args(q: QueryPairs) -> ApiResult<ReportArgs> {
    let p = q.check(REPORT_QUERY)?;
    let csv = match p.raw("format") {
        None | Some("json") => false,
        Some("csv") => true,
        Some(other) => return Err(ApiError::bad_param("format", format!("expected json or csv, got {other:?}"))),
    };
    Ok(ReportArgs {
        from: p.timestamp("from")?.unwrap_or(Timestamp::MIN),
        to: p.timestamp("to")?.unwrap_or(Timestamp::MAX),
        csv,
    })
}

fn csv_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response()
}

pub async fn report_overview(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let args = report_args(q)?;
    let report = reports::overview(&s.store.snapshot(), args.from, args.to)?;
    Ok(if args.csv { csv_response(reports::overview_csv(&report)) } else { ok(report) })
}

pub async fn report_runs_per_fill(State(s): St, _: Actor, q: QueryPairs) -> ApiResult<Response> {
    let args = report_args(q)?;
    let rows = reports::runs_per_fill(&s.store.snapshot(), args.from, args.to)?;
    Ok(if args.csv { csv_response(reports::runs_per_fill_csv(&rows)) } else { ok(rows) })
}
