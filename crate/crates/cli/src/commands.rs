//! Command-line surface. Each command maps onto a fixed sequence of API or
//! store calls.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use runlog_core::domain::{ActorRef, EntityRef, Role, Run, RunType, Tag, Timestamp};
use runlog_core::simulator::{generate, replay, DirectTarget, ReplayError, ReplayReport, SimConfig};
use runlog_core::store::{AuditReport, IntegrityReport, Page};
use runlog_core::{Store, StoreError, StoreOptions};
use runlog_service::routes::HttpMethod;
use runlog_service::wire::LogRequest;
use runlog_service::{ServeError, ServiceConfig};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use url::form_urlencoded;
use url::Url;

use crate::client::{decode, ApiClient, ClientError, HttpTarget};
use crate::config::{parse_endpoint, CliConfig, ConfigError, Output, Overrides};
use crate::render;
use crate::transport::{Payload, Transport};

pub const ENV_STORE: &str = "RUNLOG_STORE";

#[derive(Debug, Parser)]
#[command(name = "runlog", version, about = "Run, fill and logbook bookkeeping")]
pub struct Cli {
    /// Service root URL [env: RUNLOG_ENDPOINT]
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Bearer token [env: RUNLOG_TOKEN]
    #[arg(long, global = true)]
    pub token: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub output: Option<Output>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a synthetic dataset and replay it into a service or store.
    Seed(SeedArgs),
    /// Query the run catalogue.
    Runs {
        #[command(subcommand)]
        command: RunsCommand,
    },
    /// Write log entries.
    Log {
        #[command(subcommand)]
        command: LogCommand,
    },
    /// Write a store backup into an empty directory.
    Export {
        dir: PathBuf,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Restore a backup into an empty store.
    Import {
        dir: PathBuf,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Check a store's audit trail.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
}

#[derive(Debug, Args)]
pub struct StoreArg {
    /// Store directory [env: RUNLOG_STORE]
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub fills: u64,
    /// Service root URL to replay into (defaults to the configured endpoint).
    #[arg(long, conflicts_with = "store", value_parser = parse_url)]
    pub target: Option<Url>,
    /// Store directory to replay into directly.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum RunsCommand {
    List(RunsList),
}

#[derive(Debug, Args)]
pub struct RunsList {
    /// Required tag; repeat to require several.
    #[arg(long = "tag", value_parser = parse_tag)]
    pub tags: Vec<Tag>,
    #[arg(long = "type", value_parser = parse_run_type)]
    pub run_type: Option<RunType>,
    #[arg(long, value_parser = parse_timestamp)]
    pub from: Option<Timestamp>,
    #[arg(long, value_parser = parse_timestamp)]
    pub to: Option<Timestamp>,
    #[arg(long)]
    pub limit: Option<u32>,
    #[arg(long)]
    pub offset: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum LogCommand {
    New(LogNew),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("content").required(true).args(["template", "title"]))]
pub struct LogNew {
    #[arg(long, conflicts_with_all = ["title", "body_file"])]
    pub template: Option<String>,
    /// Template field as `key=value`.
    #[arg(long = "set", value_parser = parse_key_value)]
    pub values: Vec<(String, String)>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub body_file: Option<PathBuf>,
    #[arg(long = "attach")]
    pub attachments: Vec<PathBuf>,
    #[arg(long = "run")]
    pub runs: Vec<u64>,
    #[arg(long = "fill")]
    pub fills: Vec<u64>,
    #[arg(long = "pass")]
    pub passes: Vec<u64>,
    #[arg(long = "tag", value_parser = parse_tag)]
    pub tags: Vec<Tag>,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    Verify {
        #[command(flatten)]
        store: StoreArg,
    },
}

fn parse_url(s: &str) -> Result<Url, String> {
    parse_endpoint(s).map_err(|e| e.to_string())
}

fn parse_tag(s: &str) -> Result<Tag, String> {
    Tag::parse(s).map_err(|e| e.to_string())
}

fn parse_run_type(s: &str) -> Result<RunType, String> {
    s.parse::<RunType>().map_err(|e| e.to_string())
}

fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    Timestamp::parse(s).map_err(|e| e.to_string())
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got {s:?}")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Serve(#[from] ServeError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for usage problems, 1 for everything the command itself ran into.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// A one-line hint printed after usage errors.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Usage(_) => Some("try 'runlog --help'"),
            CliError::Config(_) => Some("check --endpoint, RUNLOG_ENDPOINT and ~/.config/runlog/config"),
            _ => None,
        }
    }
}

/// Everything a command needs from the outside world.
pub struct Context<'a> {
    pub env: &'a dyn Fn(&str) -> Option<String>,
    /// Path and text of the CLI config file, if present.
    pub config_file: Option<(PathBuf, String)>,
    pub connect: &'a mut dyn FnMut(&Url) -> Result<Box<dyn Transport>, CliError>,
    pub out: &'a mut dyn Write,
}

impl Context<'_> {
    fn config(&self, cli: &Cli) -> Result<CliConfig, CliError> {
        let flags = Overrides { endpoint: cli.endpoint.clone(), token: cli.token.clone(), output: cli.output };
        Ok(CliConfig::resolve(&flags, self.env, self.config_file.clone())?)
    }

    fn client(&mut self, config: &CliConfig, endpoint: &Url) -> Result<ApiClient<Box<dyn Transport>>, CliError> {
        let transport = (self.connect)(endpoint)?;
        Ok(ApiClient::new(transport, config.token.clone()))
    }

    fn store_dir(&self, arg: &StoreArg) -> Result<PathBuf, CliError> {
        arg.store
            .clone()
            .or_else(|| (self.env)(ENV_STORE).map(PathBuf::from))
            .ok_or_else(|| CliError::Usage(format!("no store given; pass --store or set {ENV_STORE}")))
    }

    fn write(&mut self, text: &str) -> Result<(), CliError> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
    }

    /// Raw bytes followed by a newline unless they already end with one.
    fn write_raw(&mut self, bytes: &[u8]) -> Result<(), CliError> {
        let mut text = String::from_utf8_lossy(bytes).into_owned();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        self.write(&text)
    }

    fn write_json(&mut self, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string(value).expect("summaries serialize");
        self.write_raw(text.as_bytes())
    }
}

pub fn execute(cli: Cli, ctx: &mut Context) -> Result<(), CliError> {
    match &cli.command {
        Command::Serve { config } => serve(config),
        Command::Seed(args) => seed(&cli, args, ctx),
        Command::Runs { command: RunsCommand::List(args) } => runs_list(&cli, args, ctx),
        Command::Log { command: LogCommand::New(args) } => log_new(&cli, args, ctx),
        Command::Export { dir, store } => {
            let output = ctx.config(&cli)?.output;
            let store = Store::open(ctx.store_dir(store)?, StoreOptions { read_only: true, ..Default::default() })?;
            let summary = store.export_store(dir)?;
            match output {
                Output::Raw => ctx.write_json(&summary),
                Output::Table => ctx.write(&render::counts(&format!("exported to {}", dir.display()), &summary.counts)),
            }
        }
        Command::Import { dir, store } => {
            let output = ctx.config(&cli)?.output;
            let store = Store::open(ctx.store_dir(store)?, StoreOptions::default())?;
            let summary = store.import_store(dir)?;
            match output {
                Output::Raw => ctx.write_json(&summary),
                Output::Table => ctx.write(&render::counts(&format!("imported from {}", dir.display()), &summary.counts)),
            }
        }
        Command::Audit { command: AuditCommand::Verify { store } } => audit_verify(&cli, store, ctx),
    }
}

fn serve(path: &Path) -> Result<(), CliError> {
    let config = ServiceConfig::load(Some(path)).map_err(|e| CliError::Usage(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: path.into(), source })?;
    runtime.block_on(runlog_service::serve(config))?;
    Ok(())
}

fn seed(cli: &Cli, args: &SeedArgs, ctx: &mut Context) -> Result<(), CliError> {
    let sim = SimConfig::with_seed(args.seed, args.fills);
    let dataset = generate(&sim).map_err(|e| CliError::Usage(e.to_string()))?;
    let (report, output) = match &args.store {
        Some(dir) => {
            let output = ctx.config(cli)?.output;
            let store = Store::open(dir, StoreOptions::default())?;
            let actor = ActorRef::new("simulator", Role::Machine).expect("non-empty id");
            (replay(&dataset, &mut DirectTarget { store: &store, actor })?, output)
        }
        None => {
            let config = ctx.config(cli)?;
            let endpoint = args.target.clone().unwrap_or_else(|| config.endpoint.clone());
            let mut target = HttpTarget { client: ctx.client(&config, &endpoint)? };
            (replay(&dataset, &mut target)?, config.output)
        }
    };
    match output {
        Output::Raw => ctx.write_json(&report)?,
        Output::Table => ctx.write(&render::replay(&dataset.catalog.counts(), &report))?,
    }
    finish_replay(&report)
}

fn finish_replay(report: &ReplayReport) -> Result<(), CliError> {
    match report.failures.len() {
        0 => Ok(()),
        n => Err(CliError::Failed(format!("{n} of {} requests were rejected", report.requests))),
    }
}

/// Query string for `GET /runs`.
pub fn runs_query(args: &RunsList) -> String {
    let mut q = form_urlencoded::Serializer::new(String::new());
    if !args.tags.is_empty() {
        q.append_pair("tags", &args.tags.iter().map(Tag::as_str).collect::<Vec<_>>().join(","));
    }
    if let Some(t) = args.run_type {
        q.append_pair("type", t.as_str());
    }
    if let Some(from) = args.from {
        q.append_pair("from", &from.to_string());
    }
    if let Some(to) = args.to {
        q.append_pair("to", &to.to_string());
    }
    if let Some(offset) = args.offset {
        q.append_pair("offset", &offset.to_string());
    }
    if let Some(limit) = args.limit {
        q.append_pair("limit", &limit.to_string());
    }
    let q = q.finish();
    if q.is_empty() {
        "/runs".to_string()
    } else {
        format!("/runs?{q}")
    }
}

fn runs_list(cli: &Cli, args: &RunsList, ctx: &mut Context) -> Result<(), CliError> {
    let config = ctx.config(cli)?;
    let mut client = ctx.client(&config, &config.endpoint)?;
    let response = client.get(&runs_query(args))?;
    match config.output {
        Output::Raw => ctx.write_raw(&response.body),
        Output::Table => {
            let page: Page<Run> = decode(&response)?;
            ctx.write(&render::runs(&page))
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// The `POST /logs` body for `log new`.
pub fn log_request(args: &LogNew) -> Result<LogRequest, CliError> {
    let associations = args
        .runs
        .iter()
        .map(|&n| EntityRef::run(n))
        .chain(args.fills.iter().map(|&n| EntityRef::fill(n)))
        .chain(args.passes.iter().map(|&n| EntityRef::pass(n)))
        .collect();
    let mut request = LogRequest { associations, tags: args.tags.iter().cloned().collect(), ..Default::default() };
    match &args.template {
        Some(name) => {
            request.template_name = Some(name.clone());
            request.values = Some(args.values.iter().cloned().collect::<BTreeMap<_, _>>());
        }
        None if !args.values.is_empty() => {
            return Err(CliError::Usage("--set needs --template".into()));
        }
        None => {
            request.title = args.title.clone();
            let body = match &args.body_file {
                Some(path) => String::from_utf8(read_file(path)?)
                    .map_err(|_| CliError::Usage(format!("{} is not UTF-8 text", path.display())))?,
                None => String::new(),
            };
            request.body = Some(body);
        }
    }
    Ok(request)
}

fn log_new(cli: &Cli, args: &LogNew, ctx: &mut Context) -> Result<(), CliError> {
    let config = ctx.config(cli)?;
    let request = log_request(args)?;
    // read every attachment before creating anything
    let files: Vec<(String, String, Vec<u8>)> = args
        .attachments
        .iter()
        .map(|path| {
            let bytes = read_file(path)?;
            let filename = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let media = mime_guess::from_path(path).first_or_octet_stream().essence_str().to_string();
            Ok((filename, media, bytes))
        })
        .collect::<Result<_, CliError>>()?;
    let mut client = ctx.client(&config, &config.endpoint)?;
    let created = client.send_json(HttpMethod::Post, "/logs", &request)?;
    let entry: Value = decode(&created)?;
    let log_id = entry["log_id"].as_u64().ok_or_else(|| CliError::Failed("response has no log_id".into()))?;
    let mut uploaded = Vec::new();
    for (filename, media_type, bytes) in files {
        let payload = Payload::File { filename, media_type, bytes };
        uploaded.push(client.send(HttpMethod::Post, &format!("/logs/{log_id}/attachments"), payload)?);
    }
    match config.output {
        Output::Raw => {
            ctx.write_raw(&created.body)?;
            for response in &uploaded {
                ctx.write_raw(&response.body)?;
            }
            Ok(())
        }
        Output::Table => {
            let attachments: Vec<Value> = uploaded.iter().map(decode).collect::<Result<_, _>>()?;
            ctx.write(&render::log_created(&entry, &attachments))
        }
    }
}

#[derive(Serialize)]
struct Verification {
    audit: AuditReport,
    integrity: IntegrityReport,
}

fn audit_verify(cli: &Cli, arg: &StoreArg, ctx: &mut Context) -> Result<(), CliError> {
    let store = Store::open(ctx.store_dir(arg)?, StoreOptions { read_only: true, ..Default::default() })?;
    let result = Verification { audit: store.verify_audit(), integrity: store.check_integrity() };
    match ctx.config(cli)?.output {
        Output::Raw => ctx.write_json(&result)?,
        Output::Table => ctx.write(&render::verification(&result.audit, &result.integrity))?,
    }
    let ok = result.audit.contiguous && result.audit.digest_mismatches.is_empty() && result.integrity.is_ok();
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed("audit verification failed".into()))
    }
}
