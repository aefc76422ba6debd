//! The route table. Both the router and the OpenAPI document are built from
//! [`ROUTES`], and query strings are checked against each route's declared
//! parameters.

use axum::http::Method;
use runlog_core::domain::{PassStatus, Quality, RunState, RunType};

pub const API_PREFIX: &str = "/api/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HttpMethod {
    Get,
    Post,
    Patch,
    Delete,
}

impl HttpMethod {
    pub const ALL: [HttpMethod; 4] = [HttpMethod::Get, HttpMethod::Post, HttpMethod::Patch, HttpMethod::Delete];

    /// Lower-case, as used for OpenAPI operation keys.
    pub fn key(self) -> &'static str {
        match self {
            HttpMethod::Get => "get",
            HttpMethod::Post => "post",
            HttpMethod::Patch => "patch",
            HttpMethod::Delete => "delete",
        }
    }

    pub fn to_http(self) -> Method {
        match self {
            HttpMethod::Get => Method::GET,
            HttpMethod::Post => Method::POST,
            HttpMethod::Patch => Method::PATCH,
            HttpMethod::Delete => Method::DELETE,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ParamType {
    Integer,
    String,
    /// RFC 3339.
    Timestamp,
    /// `KIND:id`.
    EntityRef,
    OneOf(fn() -> Vec<&'static str>),
    /// Comma-separated values from a fixed set.
    ListOf(fn() -> Vec<&'static str>),
    /// Comma-separated free strings.
    List,
}

#[derive(Debug, Clone, Copy)]
pub struct QueryParam {
    pub name: &'static str,
    pub ty: ParamType,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestBody {
    None,
    /// JSON body described by a component schema.
    Json(&'static str),
    /// `multipart/form-data` with one `file` part.
    Upload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    Json(&'static str),
    /// JSON by default, `text/csv` with `format=csv`.
    JsonOrCsv(&'static str),
    /// Raw bytes with the stored media type.
    Bytes,
}

#[derive(Debug, Clone, Copy)]
pub struct Route {
    pub method: HttpMethod,
    /// Relative to [`API_PREFIX`], in `{param}` syntax.
    pub path: &'static str,
    pub operation_id: &'static str,
    pub summary: &'static str,
    pub tag: &'static str,
    /// Reachable without a bearer token.
    pub public: bool,
    pub query: &'static [QueryParam],
    pub request: RequestBody,
    pub status: u16,
    pub reply: Reply,
    /// Error statuses besides 401 and the catch-all.
    pub errors: &'static [u16],
}

impl Route {
    pub fn full_path(&self) -> String {
        format!("{API_PREFIX}{}", self.path)
    }

    /// Names of the `{param}` segments, in order.
    pub fn path_params(&self) -> Vec<&'static str> {
        self.path
            .split('/')
            .filter_map(|seg| seg.strip_prefix('{').and_then(|s| s.strip_suffix('}')))
            .collect()
    }

    pub fn find(operation_id: &str) -> Option<&'static Route> {
        ROUTES.iter().find(|r| r.operation_id == operation_id)
    }

    /// The route serving a concrete request path such as `/api/v1/runs/12`.
    pub fn matching(method: HttpMethod, path: &str) -> Option<&'static Route> {
        let segs: Vec<&str> = path.split('/').collect();
        ROUTES.iter().find(|r| {
            let full = r.full_path();
            let template: Vec<&str> = full.split('/').collect();
            r.method == method
                && template.len() == segs.len()
                && template.iter().zip(&segs).all(|(t, s)| (t.starts_with('{') && !s.is_empty()) || t == s)
        })
    }
}

fn run_types() -> Vec<&'static str> {
    RunType::ALL.iter().map(|t| t.as_str()).collect()
}
fn qualities() -> Vec<&'static str> {
    Quality::ALL.iter().map(|t| t.as_str()).collect()
}
fn run_states() -> Vec<&'static str> {
    RunState::ALL.iter().map(|t| t.as_str()).collect()
}
fn pass_statuses() -> Vec<&'static str> {
    PassStatus::ALL.iter().map(|t| t.as_str()).collect()
}
fn formats() -> Vec<&'static str> {
    vec!["json", "csv"]
}

const OFFSET: QueryParam =
    QueryParam { name: "offset", ty: ParamType::Integer, description: "Items to skip (default 0)." };
const LIMIT: QueryParam =
    QueryParam { name: "limit", ty: ParamType::Integer, description: "Page size, 1 to 1000 (default 100)." };
const FROM: QueryParam =
    QueryParam { name: "from", ty: ParamType::Timestamp, description: "Lower time bound (RFC 3339)." };
const TO: QueryParam =
    QueryParam { name: "to", ty: ParamType::Timestamp, description: "Upper time bound (RFC 3339)." };
const TAGS: QueryParam =
    QueryParam { name: "tags", ty: ParamType::List, description: "Comma-separated tags; all must be present." };

pub const PAGING: &[QueryParam] = &[OFFSET, LIMIT];

pub const RUN_QUERY: &[QueryParam] = &[
    QueryParam { name: "run_min", ty: ParamType::Integer, description: "Smallest run number (inclusive)." },
    QueryParam { name: "run_max", ty: ParamType::Integer, description: "Largest run number (inclusive)." },
    QueryParam { name: "from", ty: ParamType::Timestamp, description: "Earliest start time (inclusive, RFC 3339)." },
    QueryParam { name: "to", ty: ParamType::Timestamp, description: "Latest start time (inclusive, RFC 3339)." },
    QueryParam { name: "type", ty: ParamType::ListOf(run_types), description: "Any of these run types." },
    QueryParam { name: "quality", ty: ParamType::ListOf(qualities), description: "Any of these qualities." },
    QueryParam { name: "state", ty: ParamType::ListOf(run_states), description: "Any of these states." },
    QueryParam { name: "fill", ty: ParamType::Integer, description: "Runs of this fill." },
    TAGS,
    OFFSET,
    LIMIT,
];

pub const LOG_QUERY: &[QueryParam] = &[
    QueryParam {
        name: "text",
        ty: ParamType::String,
        description: "Whitespace-separated tokens; each must occur, case-insensitively, in title or body.",
    },
    TAGS,
    QueryParam { name: "author", ty: ParamType::String, description: "Author actor id." },
    QueryParam { name: "association", ty: ParamType::EntityRef, description: "Associated entity as KIND:id." },
    QueryParam { name: "from", ty: ParamType::Timestamp, description: "Earliest creation time (inclusive, RFC 3339)." },
    QueryParam { name: "to", ty: ParamType::Timestamp, description: "Latest creation time (inclusive, RFC 3339)." },
    OFFSET,
    LIMIT,
];

pub const PASS_QUERY: &[QueryParam] = &[
    QueryParam { name: "status", ty: ParamType::ListOf(pass_statuses), description: "Any of these statuses." },
    QueryParam { name: "input", ty: ParamType::EntityRef, description: "Direct input as RUN:n or PASS:n." },
    OFFSET,
    LIMIT,
];

pub const AUDIT_QUERY: &[QueryParam] = &[
    QueryParam { name: "since", ty: ParamType::Integer, description: "Return records with seq greater than this (default 0)." },
    LIMIT,
];

pub const REPORT_QUERY: &[QueryParam] = &[
    FROM,
    TO,
    QueryParam { name: "format", ty: ParamType::OneOf(formats), description: "json (default) or csv." },
];

pub const ROUTES: &[Route] = &[
    Route {
        method: HttpMethod::Get,
        path: "/openapi",
        operation_id: "getOpenApi",
        summary: "This API description",
        tag: "meta",
        public: true,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("OpenApiDocument"),
        errors: &[],
    },
    Route {
        method: HttpMethod::Get,
        path: "/health",
        operation_id: "getHealth",
        summary: "Liveness and store reachability",
        tag: "meta",
        public: true,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("Health"),
        errors: &[],
    },
    Route {
        method: HttpMethod::Post,
        path: "/fills",
        operation_id: "createFill",
        summary: "Record an LHC fill",
        tag: "fills",
        public: false,
        query: &[],
        request: RequestBody::Json("NewFill"),
        status: 201,
        reply: Reply::Json("LhcFill"),
        errors: &[400, 409, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/fills",
        operation_id: "listFills",
        summary: "List fills, highest fill number first",
        tag: "fills",
        public: false,
        query: PAGING,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("FillPage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/fills/{fillNumber}",
        operation_id: "getFill",
        summary: "One fill",
        tag: "fills",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("LhcFill"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Get,
        path: "/fills/{fillNumber}/runs",
        operation_id: "listFillRuns",
        summary: "Runs of one fill, newest first",
        tag: "fills",
        public: false,
        query: PAGING,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("RunPage"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Post,
        path: "/runs",
        operation_id: "startRun",
        summary: "Start a run; the run number is allocated by the server",
        tag: "runs",
        public: false,
        query: &[],
        request: RequestBody::Json("NewRun"),
        status: 201,
        reply: Reply::Json("Run"),
        errors: &[400, 404, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/runs",
        operation_id: "listRuns",
        summary: "Search runs, newest first",
        tag: "runs",
        public: false,
        query: RUN_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("RunPage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/runs/{runNumber}",
        operation_id: "getRun",
        summary: "One run",
        tag: "runs",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("Run"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Patch,
        path: "/runs/{runNumber}",
        operation_id: "updateRun",
        summary: "Apply one lifecycle event: END or SET_QUALITY",
        tag: "runs",
        public: false,
        query: &[],
        request: RequestBody::Json("RunPatch"),
        status: 200,
        reply: Reply::Json("Run"),
        errors: &[400, 404, 409, 422],
    },
    Route {
        method: HttpMethod::Post,
        path: "/runs/{runNumber}/tags",
        operation_id: "tagRun",
        summary: "Add a tag to a run",
        tag: "runs",
        public: false,
        query: &[],
        request: RequestBody::Json("TagRequest"),
        status: 200,
        reply: Reply::Json("Run"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Delete,
        path: "/runs/{runNumber}/tags/{tag}",
        operation_id: "untagRun",
        summary: "Remove a tag from a run",
        tag: "runs",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("Run"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Post,
        path: "/passes",
        operation_id: "createPass",
        summary: "Record a reconstruction pass over a run or an earlier pass",
        tag: "passes",
        public: false,
        query: &[],
        request: RequestBody::Json("NewPass"),
        status: 201,
        reply: Reply::Json("ReconstructionPass"),
        errors: &[400, 404, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/passes",
        operation_id: "listPasses",
        summary: "List passes, newest first",
        tag: "passes",
        public: false,
        query: PASS_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("PassPage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/passes/{passId}",
        operation_id: "getPass",
        summary: "One pass",
        tag: "passes",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("ReconstructionPass"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Patch,
        path: "/passes/{passId}",
        operation_id: "updatePass",
        summary: "Move a pass forward: PENDING, RUNNING, then DONE or FAILED",
        tag: "passes",
        public: false,
        query: &[],
        request: RequestBody::Json("PassPatch"),
        status: 200,
        reply: Reply::Json("ReconstructionPass"),
        errors: &[400, 404, 409],
    },
    Route {
        method: HttpMethod::Get,
        path: "/passes/{passId}/lineage",
        operation_id: "getPassLineage",
        summary: "Input chain of a pass, ending at its root run",
        tag: "passes",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("Lineage"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Post,
        path: "/logs",
        operation_id: "createLog",
        summary: "Write a log entry, directly or from a template",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::Json("LogRequest"),
        status: 201,
        reply: Reply::Json("LogEntry"),
        errors: &[400, 404, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/logs",
        operation_id: "listLogs",
        summary: "Search log entries, newest first",
        tag: "logs",
        public: false,
        query: LOG_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("LogPage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/logs/{logId}",
        operation_id: "getLog",
        summary: "One log entry with its revisions",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("LogEntry"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Patch,
        path: "/logs/{logId}",
        operation_id: "editLog",
        summary: "Append a revision with a new title and/or body",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::Json("LogEdit"),
        status: 200,
        reply: Reply::Json("LogEntry"),
        errors: &[400, 404, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/logs/{logId}/revisions",
        operation_id: "listLogRevisions",
        summary: "All revisions of a log entry, oldest first",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("RevisionList"),
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Post,
        path: "/logs/{logId}/attachments",
        operation_id: "uploadAttachment",
        summary: "Attach a file to a log entry (multipart part named file)",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::Upload,
        status: 201,
        reply: Reply::Json("Attachment"),
        errors: &[400, 404, 413, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/attachments/{digest}",
        operation_id: "getAttachment",
        summary: "Attachment content by SHA-256 digest",
        tag: "logs",
        public: false,
        query: &[],
        request: RequestBody::None,
        status: 200,
        reply: Reply::Bytes,
        errors: &[400, 404],
    },
    Route {
        method: HttpMethod::Get,
        path: "/templates",
        operation_id: "listTemplates",
        summary: "Log templates by name",
        tag: "templates",
        public: false,
        query: PAGING,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("TemplatePage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Post,
        path: "/templates",
        operation_id: "createTemplate",
        summary: "Define a log template",
        tag: "templates",
        public: false,
        query: &[],
        request: RequestBody::Json("NewTemplate"),
        status: 201,
        reply: Reply::Json("Template"),
        errors: &[400, 409, 422],
    },
    Route {
        method: HttpMethod::Get,
        path: "/audit",
        operation_id: "readAudit",
        summary: "Audit records after a sequence number, oldest first",
        tag: "audit",
        public: false,
        query: AUDIT_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::Json("AuditPage"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/reports/overview",
        operation_id: "reportOverview",
        summary: "Counts, durations and tags for entities in [from, to)",
        tag: "reports",
        public: false,
        query: REPORT_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::JsonOrCsv("OverviewReport"),
        errors: &[400],
    },
    Route {
        method: HttpMethod::Get,
        path: "/reports/runs-per-fill",
        operation_id: "reportRunsPerFill",
        summary: "Runs starting in [from, to) per fill, most first",
        tag: "reports",
        public: false,
        query: REPORT_QUERY,
        request: RequestBody::None,
        status: 200,
        reply: Reply::JsonOrCsv("FillRunCountList"),
        errors: &[400],
    },
];

/// Schema of a path parameter by name.
pub fn path_param_type(name: &str) -> ParamType {
    match name {
        "tag" | "digest" => ParamType::String,
        _ => ParamType::Integer,
    }
}
