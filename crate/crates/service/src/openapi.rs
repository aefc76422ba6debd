//! OpenAPI 3.1 description generated from the route table.

use runlog_core::domain::{EntityKind, LogOrigin, PassStatus, Quality, Role, RunState, RunType};
use runlog_core::reports::BUCKET_LABELS;
use runlog_core::store::{AuditAction, MAX_PAGE_LIMIT};
use serde_json::{json, Map, Value};

use crate::error::ErrorCode;
use crate::routes::{path_param_type, ParamType, Reply, RequestBody, Route, ROUTES};

pub const OPENAPI_VERSION: &str = "3.1.0";

fn schema_ref(name: &str) -> Value {
    json!({ "$ref": format!("#/components/schemas/{name}") })
}

fn nullable(schema: Value) -> Value {
    json!({ "anyOf": [schema, { "type": "null" }] })
}

fn enum_of(values: impl IntoIterator<Item = &'static str>) -> Value {
    json!({ "type": "string", "enum": values.into_iter().collect::<Vec<_>>() })
}

fn object(required: &[&str], properties: Value) -> Value {
    json!({
        "type": "object",
        "required": required,
        "properties": properties,
        "additionalProperties": false,
    })
}

fn page_of(item: &str) -> Value {
    object(
        &["items", "total", "offset", "limit"],
        json!({
            "items": { "type": "array", "items": schema_ref(item) },
            "total": { "type": "integer", "minimum": 0, "description": "All matches, not just this page." },
            "offset": { "type": "integer", "minimum": 0 },
            "limit": { "type": "integer", "minimum": 1, "maximum": MAX_PAGE_LIMIT },
        }),
    )
}

fn string_map() -> Value {
    json!({ "type": "object", "additionalProperties": { "type": "string" } })
}

fn tag_set() -> Value {
    json!({ "type": "array", "uniqueItems": true, "items": schema_ref("Tag") })
}

fn id() -> Value {
    json!({ "type": "integer", "minimum": 0 })
}

pub fn schemas() -> Map<String, Value> {
    let mut s = Map::new();
    let mut put = |name: &str, v: Value| {
        s.insert(name.to_string(), v);
    };
    put("Timestamp", json!({ "type": "string", "format": "date-time", "description": "RFC 3339, UTC, millisecond precision." }));
    put("Tag", json!({ "type": "string", "pattern": "^[a-z0-9][a-z0-9._-]{0,63}$" }));
    put("Digest", json!({ "type": "string", "pattern": "^[0-9a-f]{64}$", "description": "Lower-case hex SHA-256." }));
    put("RunType", enum_of(RunType::ALL.iter().map(|v| v.as_str())));
    put("RunState", enum_of(RunState::ALL.iter().map(|v| v.as_str())));
    put("Quality", enum_of(Quality::ALL.iter().map(|v| v.as_str())));
    put("PassStatus", enum_of(PassStatus::ALL.iter().map(|v| v.as_str())));
    put("LogOrigin", enum_of(LogOrigin::ALL.iter().map(|v| v.as_str())));
    put("Role", enum_of(Role::ALL.iter().map(|v| v.as_str())));
    put("EntityKind", enum_of(EntityKind::ALL.iter().map(|v| v.as_str())));
    put("AuditAction", enum_of(AuditAction::ALL.iter().map(|v| v.as_str())));
    put("EntityRef", object(&["kind", "id"], json!({ "kind": schema_ref("EntityKind"), "id": id() })));
    put(
        "ActorRef",
        object(&["actor_id", "role"], json!({ "actor_id": { "type": "string", "minLength": 1 }, "role": schema_ref("Role") })),
    );
    put(
        "LhcFill",
        object(
            &["fill_number", "stable_beams_start", "stable_beams_end", "beam_type", "created_at"],
            json!({
                "fill_number": id(),
                "stable_beams_start": nullable(schema_ref("Timestamp")),
                "stable_beams_end": nullable(schema_ref("Timestamp")),
                "beam_type": { "type": "string" },
                "created_at": schema_ref("Timestamp"),
            }),
        ),
    );
    put(
        "NewFill",
        object(
            &["fill_number"],
            json!({
                "fill_number": id(),
                "stable_beams_start": nullable(schema_ref("Timestamp")),
                "stable_beams_end": nullable(schema_ref("Timestamp")),
                "beam_type": { "type": "string" },
                "created_at": nullable(schema_ref("Timestamp")),
            }),
        ),
    );
    put(
        "Run",
        object(
            &["run_number", "run_type", "state", "start_time", "end_time", "fill_number", "configuration", "quality", "tags", "data_set_id"],
            json!({
                "run_number": id(),
                "run_type": schema_ref("RunType"),
                "state": schema_ref("RunState"),
                "start_time": schema_ref("Timestamp"),
                "end_time": nullable(schema_ref("Timestamp")),
                "fill_number": nullable(id()),
                "configuration": string_map(),
                "quality": schema_ref("Quality"),
                "tags": tag_set(),
                "data_set_id": { "type": "string" },
            }),
        ),
    );
    put(
        "NewRun",
        object(
            &["run_type"],
            json!({
                "run_type": schema_ref("RunType"),
                "start_time": nullable(schema_ref("Timestamp")),
                "fill_number": nullable(id()),
                "configuration": string_map(),
                "tags": tag_set(),
            }),
        ),
    );
    put(
        "RunPatch",
        json!({
            "oneOf": [
                object(&["event"], json!({ "event": { "const": "END" }, "end_time": schema_ref("Timestamp") })),
                object(&["event", "quality"], json!({ "event": { "const": "SET_QUALITY" }, "quality": schema_ref("Quality") })),
            ]
        }),
    );
    put("TagRequest", object(&["tag"], json!({ "tag": schema_ref("Tag") })));
    put(
        "ReconstructionPass",
        object(
            &["pass_id", "name", "input", "configuration", "status", "created_at"],
            json!({
                "pass_id": id(),
                "name": { "type": "string" },
                "input": schema_ref("EntityRef"),
                "configuration": string_map(),
                "status": schema_ref("PassStatus"),
                "created_at": schema_ref("Timestamp"),
            }),
        ),
    );
    put(
        "NewPass",
        object(
            &["name", "input"],
            json!({
                "name": { "type": "string", "minLength": 1 },
                "input": schema_ref("EntityRef"),
                "configuration": string_map(),
                "created_at": nullable(schema_ref("Timestamp")),
            }),
        ),
    );
    put("PassPatch", object(&["status"], json!({ "status": schema_ref("PassStatus") })));
    put(
        "Lineage",
        object(
            &["pass_id", "chain"],
            json!({
                "pass_id": id(),
                "chain": { "type": "array", "minItems": 2, "items": schema_ref("EntityRef"), "description": "The pass first, its root run last." },
            }),
        ),
    );
    put(
        "Attachment",
        object(
            &["digest", "filename", "media_type", "size_bytes"],
            json!({
                "digest": schema_ref("Digest"),
                "filename": { "type": "string" },
                "media_type": { "type": "string" },
                "size_bytes": { "type": "integer", "minimum": 0 },
            }),
        ),
    );
    put(
        "Revision",
        object(
            &["revision_index", "title", "body", "edited_by", "edited_at"],
            json!({
                "revision_index": { "type": "integer", "minimum": 0 },
                "title": { "type": "string" },
                "body": { "type": "string" },
                "edited_by": schema_ref("ActorRef"),
                "edited_at": schema_ref("Timestamp"),
            }),
        ),
    );
    put("RevisionList", json!({ "type": "array", "minItems": 1, "items": schema_ref("Revision") }));
    put(
        "LogEntry",
        object(
            &["log_id", "title", "body", "author", "origin", "created_at", "associations", "tags", "attachments", "revisions"],
            json!({
                "log_id": id(),
                "title": { "type": "string", "description": "Title of the latest revision." },
                "body": { "type": "string", "description": "Body of the latest revision." },
                "author": schema_ref("ActorRef"),
                "origin": schema_ref("LogOrigin"),
                "created_at": schema_ref("Timestamp"),
                "associations": { "type": "array", "items": schema_ref("EntityRef") },
                "tags": tag_set(),
                "attachments": { "type": "array", "items": schema_ref("Attachment") },
                "revisions": { "type": "array", "minItems": 1, "items": schema_ref("Revision") },
            }),
        ),
    );
    put(
        "LogRequest",
        json!({
            "type": "object",
            "description": "Either title (and body) or template_name (and values).",
            "properties": {
                "title": { "type": "string" },
                "body": { "type": "string" },
                "template_name": { "type": "string" },
                "values": string_map(),
                "associations": { "type": "array", "items": schema_ref("EntityRef") },
                "tags": tag_set(),
                "origin": schema_ref("LogOrigin"),
                "created_at": schema_ref("Timestamp"),
            },
            "oneOf": [
                { "required": ["title"], "not": { "anyOf": [{ "required": ["template_name"] }, { "required": ["values"] }] } },
                { "required": ["template_name"], "not": { "anyOf": [{ "required": ["title"] }, { "required": ["body"] }] } },
            ],
            "additionalProperties": false,
        }),
    );
    put(
        "LogEdit",
        object(&[], json!({ "title": { "type": "string", "minLength": 1 }, "body": { "type": "string" } })),
    );
    let template_props = json!({
        "template_name": { "type": "string", "minLength": 1 },
        "title_pattern": { "type": "string", "description": "Text with {{field}} placeholders." },
        "body_pattern": { "type": "string" },
        "required_fields": { "type": "array", "uniqueItems": true, "items": { "type": "string" } },
        "default_tags": tag_set(),
    });
    let mut full = template_props.clone();
    full["template_id"] = id();
    put(
        "Template",
        object(&["template_id", "template_name", "title_pattern", "body_pattern", "required_fields", "default_tags"], full),
    );
    put("NewTemplate", object(&["template_name", "title_pattern", "body_pattern"], template_props));
    put(
        "AuditRecord",
        object(
            &["seq", "timestamp", "actor", "action", "target", "payload_digest"],
            json!({
                "seq": { "type": "integer", "minimum": 1 },
                "timestamp": schema_ref("Timestamp"),
                "actor": schema_ref("ActorRef"),
                "action": schema_ref("AuditAction"),
                "target": schema_ref("EntityRef"),
                "payload_digest": schema_ref("Digest"),
            }),
        ),
    );
    put(
        "HistogramBucket",
        object(
            &["label", "min_seconds", "max_seconds", "count"],
            json!({
                "label": enum_of(BUCKET_LABELS),
                "min_seconds": { "type": "integer", "minimum": 0 },
                "max_seconds": nullable(json!({ "type": "integer", "minimum": 0 })),
                "count": { "type": "integer", "minimum": 0 },
            }),
        ),
    );
    put(
        "OverviewReport",
        object(
            &[
                "from", "to", "fill_count", "run_count", "log_count", "pass_count", "runs_with_fill",
                "fills_with_runs", "mean_runs_per_fill", "runs_without_fill", "logs_per_run",
                "duration_histogram", "tag_frequency",
            ],
            json!({
                "from": schema_ref("Timestamp"),
                "to": schema_ref("Timestamp"),
                "fill_count": { "type": "integer", "minimum": 0 },
                "run_count": { "type": "integer", "minimum": 0 },
                "log_count": { "type": "integer", "minimum": 0 },
                "pass_count": { "type": "integer", "minimum": 0 },
                "runs_with_fill": { "type": "integer", "minimum": 0 },
                "fills_with_runs": { "type": "integer", "minimum": 0 },
                "mean_runs_per_fill": {
                    "type": "number", "minimum": 0,
                    "description": "Runs with a fill divided by the number of fills having at least one run; 0 when there are none.",
                },
                "runs_without_fill": { "type": "integer", "minimum": 0 },
                "logs_per_run": { "type": "number", "minimum": 0 },
                "duration_histogram": {
                    "type": "array", "minItems": BUCKET_LABELS.len(), "maxItems": BUCKET_LABELS.len(),
                    "items": schema_ref("HistogramBucket"),
                    "description": "Ended runs by duration.",
                },
                "tag_frequency": { "type": "object", "additionalProperties": { "type": "integer", "minimum": 1 } },
            }),
        ),
    );
    put(
        "FillRunCount",
        object(&["fill_number", "run_count"], json!({ "fill_number": id(), "run_count": { "type": "integer", "minimum": 1 } })),
    );
    put("FillRunCountList", json!({ "type": "array", "items": schema_ref("FillRunCount") }));
    put("FillPage", page_of("LhcFill"));
    put("RunPage", page_of("Run"));
    put("PassPage", page_of("ReconstructionPass"));
    put("LogPage", page_of("LogEntry"));
    put("TemplatePage", page_of("Template"));
    put("AuditPage", page_of("AuditRecord"));
    put(
        "Health",
        object(
            &["status", "version", "store"],
            json!({
                "status": { "type": "string" },
                "version": { "type": "string" },
                "store": object(
                    &["reachable", "audit_records"],
                    json!({ "reachable": { "type": "boolean" }, "audit_records": { "type": "integer", "minimum": 0 } }),
                ),
            }),
        ),
    );
    put(
        "ErrorEnvelope",
        object(
            &["code", "message", "detail"],
            json!({
                "code": enum_of(ErrorCode::ALL.iter().map(|c| c.as_str())),
                "message": { "type": "string" },
                "detail": { "type": ["object", "null"] },
            }),
        ),
    );
    put(
        "OpenApiDocument",
        json!({ "type": "object", "required": ["openapi", "info", "paths"] }),
    );
    s
}

fn param_schema(ty: ParamType) -> Value {
    match ty {
        ParamType::Integer => json!({ "type": "integer", "minimum": 0 }),
        ParamType::String => json!({ "type": "string" }),
        ParamType::Timestamp => schema_ref("Timestamp"),
        ParamType::EntityRef => json!({ "type": "string", "pattern": "^[A-Za-z]+:[0-9]+$" }),
        ParamType::OneOf(values) => enum_of(values()),
        ParamType::ListOf(values) => json!({ "type": "array", "items": enum_of(values()) }),
        ParamType::List => json!({ "type": "array", "items": { "type": "string" } }),
    }
}

fn is_list(ty: ParamType) -> bool {
    matches!(ty, ParamType::ListOf(_) | ParamType::List)
}

fn error_response(status: u16) -> Value {
    let description = match status {
        400 => "Malformed request or query",
        401 => "Missing or unknown bearer token",
        404 => "Entity or reference not found",
        409 => "Conflicts with the current state",
        413 => "Upload exceeds the size limit",
        422 => "Well-formed but violates a domain rule",
        _ => "Unexpected error",
    };
    json!({
        "description": description,
        "content": { "application/json": { "schema": schema_ref("ErrorEnvelope") } },
    })
}

fn operation(route: &Route) -> Value {
    let mut params = Vec::new();
    for name in route.path_params() {
        params.push(json!({ "name": name, "in": "path", "required": true, "schema": param_schema(path_param_type(name)) }));
    }
    for q in route.query {
        let mut p = json!({
            "name": q.name,
            "in": "query",
            "required": false,
            "description": q.description,
            "schema": param_schema(q.ty),
        });
        if is_list(q.ty) {
            p["style"] = json!("form");
            p["explode"] = json!(false);
        }
        params.push(p);
    }

    let success = match route.reply {
        Reply::Json(name) => json!({ "application/json": { "schema": schema_ref(name) } }),
        Reply::JsonOrCsv(name) => json!({
            "application/json": { "schema": schema_ref(name) },
            "text/csv": { "schema": { "type": "string" } },
        }),
        // served with the media type recorded at upload
        Reply::Bytes => json!({ "*/*": { "schema": { "type": "string" } } }),
    };
    let mut responses = Map::new();
    responses.insert(
        route.status.to_string(),
        json!({ "description": route.summary, "content": success }),
    );
    let mut errors: Vec<u16> = route.errors.to_vec();
    // unknown tokens are rejected on every route, public or not
    errors.push(401);
    errors.sort_unstable();
    errors.dedup();
    for status in errors {
        responses.insert(status.to_string(), error_response(status));
    }
    responses.insert("default".into(), error_response(500));

    let mut op = json!({
        "operationId": route.operation_id,
        "summary": route.summary,
        "tags": [route.tag],
        "responses": responses,
    });
    if !params.is_empty() {
        op["parameters"] = json!(params);
    }
    match route.request {
        RequestBody::None => {}
        RequestBody::Json(name) => {
            op["requestBody"] = json!({ "required": true, "content": { "application/json": { "schema": schema_ref(name) } } });
        }
        RequestBody::Upload => {
            op["requestBody"] = json!({
                "required": true,
                "content": { "multipart/form-data": { "schema": {
                    "type": "object",
                    "required": ["file"],
                    "properties": { "file": { "type": "string", "contentMediaType": "application/octet-stream" } },
                } } },
            });
        }
    }
    if route.public {
        op["security"] = json!([]);
    }
    op
}

/// The full document served at `GET /api/v1/openapi`.
pub fn document() -> Value {
    let mut paths = Map::new();
    for route in ROUTES {
        let item = paths.entry(route.full_path()).or_insert_with(|| json!({}));
        item[route.method.key()] = operation(route);
    }
    json!({
        "openapi": OPENAPI_VERSION,
        "info": {
            "title": "runlog",
            "version": env!("CARGO_PKG_VERSION"),
            "description": "Bookkeeping for LHC fills, data-taking runs, reconstruction passes and log entries. Every successful mutation appends one audit record; nothing is deleted.",
        },
        "paths": paths,
        "components": {
            "schemas": schemas(),
            "securitySchemes": { "bearer": { "type": "http", "scheme": "bearer" } },
        },
        "security": [{ "bearer": [] }],
    })
}
