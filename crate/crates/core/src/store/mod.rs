//! Durable catalogue store.
//!
//! Every successful mutation appends exactly one journal line that carries
//! both the new entity state and its [`AuditRecord`], so the entity and its
//! audit trail become durable together or not at all. Mutations are
//! serialized by a single writer lock; readers see committed state only.
//! Nothing is ever deleted.

mod audit;
mod blobs;
mod catalog;
mod export;
mod journal;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock, RwLockReadGuard};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use audit::{AuditAction, AuditRecord, AuditReport};
pub use catalog::{Catalog, Effect, EntityCounts, IntegrityReport};
pub use export::{read_export, write_export, ExportSummary, ImportSummary, EXPORT_FILE, EXPORT_HEADER};
pub use journal::{CrashPoint, FaultPlan};

use crate::canonical::payload_digest;
use crate::clock::{Clock, SystemClock};
use crate::domain::{
    apply_run_event, check_pass_input, check_pass_transition, match_log, match_pass, match_run,
    render_template, ActorRef, Attachment, Configuration, DomainError, EntityKind, EntityRef,
    LhcFill, LogEntry, LogOrigin, LogQuery, PassQuery, PassStatus, ReconstructionPass, Role, Run,
    RunEvent, RunQuery, RunType, TagSet, Template, Timestamp,
};
use blobs::BlobStore;
use journal::{frame, AppendOutcome, Journal, JournalEntry};

pub const DEFAULT_MAX_ATTACHMENT_BYTES: u64 = 64 * 1024 * 1024;
pub const DEFAULT_PAGE_LIMIT: u32 = 100;
pub const MAX_PAGE_LIMIT: u32 = 1000;

pub const JOURNAL_FILE: &str = "journal.log";
pub const BLOB_DIR: &str = "blobs";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("unknown reference {0}")]
    UnknownReference(EntityRef),
    #[error("attachment of {size} bytes exceeds the {max} byte limit")]
    TooLarge { size: u64, max: u64 },
    #[error("unknown attachment digest {0}")]
    UnknownDigest(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("store is corrupt: {0}")]
    Corrupt(String),
    #[error("store was opened read-only")]
    ReadOnly,
    #[error("store crashed (injected fault); reopen to recover")]
    Crashed,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total: u64,
    pub offset: u64,
    pub limit: u32,
}

impl<T: Clone> Page<T> {
    /// Slices `[offset, offset + limit)` out of an already ordered sequence.
    pub fn slice<'a, I>(ordered: I, offset: u64, limit: u32) -> Result<Page<T>, DomainError>
    where
        I: IntoIterator<Item = &'a T>,
        T: 'a,
    {
        check_limit(limit)?;
        let mut items = Vec::new();
        let mut total = 0u64;
        for item in ordered {
            if total >= offset && items.len() < limit as usize {
                items.push(item.clone());
            }
            total += 1;
        }
        Ok(Page { items, total, offset, limit })
    }
}

pub fn check_limit(limit: u32) -> Result<(), DomainError> {
    if (1..=MAX_PAGE_LIMIT).contains(&limit) {
        Ok(())
    } else {
        Err(DomainError::InvalidQuery(format!(
            "limit must be between 1 and {MAX_PAGE_LIMIT}, got {limit}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewFill {
    pub fill_number: u64,
    #[serde(default)]
    pub stable_beams_start: Option<Timestamp>,
    #[serde(default)]
    pub stable_beams_end: Option<Timestamp>,
    #[serde(default)]
    pub beam_type: String,
    /// Defaults to the store clock.
    #[serde(default)]
    pub created_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRun {
    pub run_type: RunType,
    /// Defaults to the store clock.
    #[serde(default)]
    pub start_time: Option<Timestamp>,
    #[serde(default)]
    pub fill_number: Option<u64>,
    #[serde(default)]
    pub configuration: Configuration,
    #[serde(default)]
    pub tags: TagSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewPass {
    pub name: String,
    pub input: EntityRef,
    #[serde(default)]
    pub configuration: Configuration,
    #[serde(default)]
    pub created_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogContent {
    Direct { title: String, body: String },
    Template { template_name: String, values: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewLog {
    pub content: LogContent,
    #[serde(default)]
    pub associations: Vec<EntityRef>,
    /// Merged with the template's default tags.
    #[serde(default)]
    pub tags: TagSet,
    /// Defaults to `PROCESS` for machine actors, `HUMAN` otherwise.
    #[serde(default)]
    pub origin: Option<LogOrigin>,
    #[serde(default)]
    pub created_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewTemplate {
    pub template_name: String,
    pub title_pattern: String,
    pub body_pattern: String,
    #[serde(default)]
    pub required_fields: BTreeSet<String>,
    #[serde(default)]
    pub default_tags: TagSet,
}

#[derive(Clone)]
pub struct StoreOptions {
    /// Sync the journal after every commit.
    pub fsync: bool,
    pub max_attachment_bytes: u64,
    pub read_only: bool,
    /// Test hook: simulate a process crash during one commit.
    pub fault: Option<FaultPlan>,
    pub clock: Arc<dyn Clock>,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions {
            fsync: true,
            max_attachment_bytes: DEFAULT_MAX_ATTACHMENT_BYTES,
            read_only: false,
            fault: None,
            clock: Arc::new(SystemClock),
        }
    }
}

impl std::fmt::Debug for StoreOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StoreOptions")
            .field("fsync", &self.fsync)
            .field("max_attachment_bytes", &self.max_attachment_bytes)
            .field("read_only", &self.read_only)
            .field("fault", &self.fault)
            .finish_non_exhaustive()
    }
}

struct Writer {
    /// `None` when read-only.
    journal: Option<Journal>,
    crashed: bool,
}

pub struct Store {
    catalog: RwLock<Catalog>,
    writer: Mutex<Writer>,
    blobs: BlobStore,
    options: StoreOptions,
    location: Option<PathBuf>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("location", &self.location)
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

impl Store {
    pub fn in_memory(options: StoreOptions) -> Store {
        Store {
            catalog: RwLock::new(Catalog::default()),
            writer: Mutex::new(Writer {
                journal: (!options.read_only).then(|| Journal::memory(options.fault)),
                crashed: false,
            }),
            blobs: BlobStore::memory(),
            options,
            location: None,
        }
    }

    /// Opens the store directory `dir`, creating it unless read-only, and
    /// recovers committed state from its journal.
    pub fn open(dir: impl AsRef<Path>, options: StoreOptions) -> Result<Store> {
        let dir = dir.as_ref();
        if !options.read_only {
            std::fs::create_dir_all(dir)?;
        }
        let (journal, catalog) =
            Journal::open(&dir.join(JOURNAL_FILE), options.fsync, options.read_only, options.fault)?;
        let blobs = BlobStore::dir(dir.join(BLOB_DIR), !options.read_only)?;
        Ok(Store {
            catalog: RwLock::new(catalog),
            writer: Mutex::new(Writer { journal, crashed: false }),
            blobs,
            options,
            location: Some(dir.to_path_buf()),
        })
    }

    pub fn location(&self) -> Option<&Path> {
        self.location.as_deref()
    }

    pub fn options(&self) -> &StoreOptions {
        &self.options
    }

    /// Read access to one consistent snapshot of the committed catalogue.
    pub fn snapshot(&self) -> RwLockReadGuard<'_, Catalog> {
        self.catalog.read()
    }

    pub fn counts(&self) -> EntityCounts {
        self.catalog.read().counts()
    }

    pub fn blob_count(&self) -> usize {
        self.blobs.count()
    }

    /// Validates and applies one mutation under the writer lock.
    ///
    /// `build` sees the committed catalogue and the commit time and returns
    /// the audit target, the canonical payload and the resulting effect.
    fn commit<F>(&self, actor: &ActorRef, action: AuditAction, build: F) -> Result<Effect>
    where
        F: FnOnce(&Catalog, Timestamp) -> Result<(EntityRef, Value, Effect)>,
    {
        actor.validate()?;
        let mut writer = self.writer.lock();
        if writer.crashed {
            return Err(StoreError::Crashed);
        }
        if writer.journal.is_none() {
            return Err(StoreError::ReadOnly);
        }
        let now = self.options.clock.now();
        let (entry, effect) = {
            let catalog = self.catalog.read();
            let (target, payload, effect) = build(&catalog, now)?;
            let audit = AuditRecord {
                seq: catalog.last_seq() + 1,
                timestamp: now,
                actor: actor.clone(),
                action,
                target,
                payload_digest: payload_digest(&payload),
            };
            (JournalEntry::Commit { audit, payload, effect: effect.clone() }, effect)
        };
        let line = frame(&entry)?;
        let journal = writer.journal.as_mut().expect("checked above");
        match journal.append(&line) {
            Ok(AppendOutcome::Durable) => {}
            Ok(AppendOutcome::DurableThenCrashed) | Err(StoreError::Crashed) => {
                writer.crashed = true;
                return Err(StoreError::Crashed);
            }
            Err(e) => return Err(e),
        }
        entry.apply_to(&mut self.catalog.write());
        Ok(effect)
    }

    pub fn create_fill(&self, new: NewFill, actor: &ActorRef) -> Result<LhcFill> {
        let effect = self.commit(actor, AuditAction::CreateFill, |cat, now| {
            let fill = LhcFill {
                fill_number: new.fill_number,
                stable_beams_start: new.stable_beams_start,
                stable_beams_end: new.stable_beams_end,
                beam_type: new.beam_type.clone(),
                created_at: new.created_at.unwrap_or(now),
            };
            fill.validate()?;
            if cat.fills.contains_key(&fill.fill_number) {
                return Err(StoreError::Conflict(format!("fill {} already exists", fill.fill_number)));
            }
            let payload = json!({ "request": new });
            Ok((EntityRef::fill(fill.fill_number), payload, Effect::Fill(fill)))
        })?;
        match effect {
            Effect::Fill(f) => Ok(f),
            _ => unreachable!("create_fill commits a fill"),
        }
    }

    pub fn create_run(&self, new: NewRun, actor: &ActorRef) -> Result<Run> {
        let effect = self.commit(actor, AuditAction::CreateRun, |cat, now| {
            if let Some(f) = new.fill_number {
                if !cat.fills.contains_key(&f) {
                    return Err(StoreError::UnknownReference(EntityRef::fill(f)));
                }
            }
            let run_number = cat.next_run_number();
            let run = Run::start(
                run_number,
                new.run_type,
                new.start_time.unwrap_or(now),
                new.fill_number,
                new.configuration.clone(),
                new.tags.clone(),
            );
            run.validate()?;
            let payload = json!({ "run_number": run_number, "request": new });
            Ok((EntityRef::run(run_number), payload, Effect::Run(run)))
        })?;
        match effect {
            Effect::Run(r) => Ok(r),
            _ => unreachable!("create_run commits a run"),
        }
    }

    pub fn mutate_run(&self, run_number: u64, event: RunEvent, actor: &ActorRef) -> Result<Run> {
        let action = match event {
            RunEvent::End { .. } => AuditAction::EndRun,
            RunEvent::SetQuality { .. } => AuditAction::SetQuality,
            RunEvent::AddTag { .. } => AuditAction::TagRun,
            RunEvent::RemoveTag { .. } => AuditAction::UntagRun,
        };
        let effect = self.commit(actor, action, |cat, _| {
            let run = cat
                .runs
                .get(&run_number)
                .ok_or_else(|| StoreError::NotFound(format!("run {run_number}")))?;
            let next = apply_run_event(run, &event)?;
            let payload = json!({ "run_number": run_number, "event": event });
            Ok((EntityRef::run(run_number), payload, Effect::Run(next)))
        })?;
        match effect {
            Effect::Run(r) => Ok(r),
            _ => unreachable!("mutate_run commits a run"),
        }
    }

    pub fn create_pass(&self, new: NewPass, actor: &ActorRef) -> Result<ReconstructionPass> {
        let effect = self.commit(actor, AuditAction::CreatePass, |cat, now| {
            check_pass_input(new.input)?;
            if !cat.exists(new.input) {
                return Err(StoreError::UnknownReference(new.input));
            }
            if new.name.trim().is_empty() {
                return Err(DomainError::Invalid("pass name must not be empty".into()).into());
            }
            let pass_id = cat.next_pass_id();
            let pass = ReconstructionPass {
                pass_id,
                name: new.name.clone(),
                input: new.input,
                configuration: new.configuration.clone(),
                status: PassStatus::Pending,
                created_at: new.created_at.unwrap_or(now),
            };
            let payload = json!({ "pass_id": pass_id, "request": new });
            Ok((EntityRef::pass(pass_id), payload, Effect::Pass(pass)))
        })?;
        match effect {
            Effect::Pass(p) => Ok(p),
            _ => unreachable!("create_pass commits a pass"),
        }
    }

    pub fn set_pass_status(
        &self,
        pass_id: u64,
        status: PassStatus,
        actor: &ActorRef,
    ) -> Result<ReconstructionPass> {
        let effect = self.commit(actor, AuditAction::SetPassStatus, |cat, _| {
            let pass = cat
                .passes
                .get(&pass_id)
                .ok_or_else(|| StoreError::NotFound(format!("reconstruction pass {pass_id}")))?;
            check_pass_transition(pass.status, status)?;
            let mut next = pass.clone();
            next.status = status;
            let payload = json!({ "pass_id": pass_id, "status": status });
            Ok((EntityRef::pass(pass_id), payload, Effect::Pass(next)))
        })?;
        match effect {
            Effect::Pass(p) => Ok(p),
            _ => unreachable!("set_pass_status commits a pass"),
        }
    }

    pub fn create_log(&self, new: NewLog, actor: &ActorRef) -> Result<LogEntry> {
        let effect = self.commit(actor, AuditAction::CreateLog, |cat, now| {
            for assoc in &new.associations {
                if !matches!(assoc.kind, EntityKind::Run | EntityKind::Fill | EntityKind::Pass) {
                    return Err(DomainError::Invalid(format!(
                        "log entries cannot be associated with {}",
                        assoc.kind
                    ))
                    .into());
                }
                if !cat.exists(*assoc) {
                    return Err(StoreError::UnknownReference(*assoc));
                }
            }
            let (title, body, mut tags) = match &new.content {
                LogContent::Direct { title, body } => (title.clone(), body.clone(), TagSet::new()),
                LogContent::Template { template_name, values } => {
                    let template = cat
                        .templates
                        .get(template_name)
                        .ok_or_else(|| StoreError::NotFound(format!("template {template_name:?}")))?;
                    let rendered = render_template(template, values)?;
                    (rendered.title, rendered.body, rendered.tags)
                }
            };
            if title.trim().is_empty() {
                return Err(DomainError::Invalid("log title must not be empty".into()).into());
            }
            tags.extend(new.tags.iter().cloned());
            let mut associations = Vec::new();
            for a in &new.associations {
                if !associations.contains(a) {
                    associations.push(*a);
                }
            }
            let origin = new.origin.unwrap_or(if actor.role == Role::Machine {
                LogOrigin::Process
            } else {
                LogOrigin::Human
            });
            let log_id = cat.next_log_id();
            let log = LogEntry::create(
                log_id,
                title,
                body,
                actor.clone(),
                origin,
                new.created_at.unwrap_or(now),
                associations,
                tags,
            );
            let payload = json!({ "log_id": log_id, "request": new });
            Ok((EntityRef::log(log_id), payload, Effect::Log(log)))
        })?;
        match effect {
            Effect::Log(l) => Ok(l),
            _ => unreachable!("create_log commits a log"),
        }
    }

    /// Appends a revision; earlier revisions are kept.
    pub fn edit_log(
        &self,
        log_id: u64,
        title: Option<String>,
        body: Option<String>,
        actor: &ActorRef,
    ) -> Result<LogEntry> {
        let effect = self.commit(actor, AuditAction::EditLog, |cat, now| {
            let log = cat
                .logs
                .get(&log_id)
                .ok_or_else(|| StoreError::NotFound(format!("log entry {log_id}")))?;
            if title.as_deref().is_some_and(|t| t.trim().is_empty()) {
                return Err(DomainError::Invalid("log title must not be empty".into()).into());
            }
            let next = log.with_revision(title.clone(), body.clone(), actor.clone(), now)?;
            let payload = json!({ "log_id": log_id, "title": title, "body": body });
            Ok((EntityRef::log(log_id), payload, Effect::Log(next)))
        })?;
        match effect {
            Effect::Log(l) => Ok(l),
            _ => unreachable!("edit_log commits a log"),
        }
    }

    pub fn create_template(&self, new: NewTemplate, actor: &ActorRef) -> Result<Template> {
        let effect = self.commit(actor, AuditAction::CreateTemplate, |cat, _| {
            if cat.templates.contains_key(&new.template_name) {
                return Err(StoreError::Conflict(format!(
                    "template {:?} already exists",
                    new.template_name
                )));
            }
            let template = Template {
                template_id: cat.next_template_id(),
                template_name: new.template_name.clone(),
                title_pattern: new.title_pattern.clone(),
                body_pattern: new.body_pattern.clone(),
                required_fields: new.required_fields.clone(),
                default_tags: new.default_tags.clone(),
            };
            template.validate()?;
            let target = EntityRef::new(EntityKind::Template, template.template_id);
            let payload = json!({ "template_id": template.template_id, "request": new });
            Ok((target, payload, Effect::Template(template)))
        })?;
        match effect {
            Effect::Template(t) => Ok(t),
            _ => unreachable!("create_template commits a template"),
        }
    }

    /// Stores `bytes` (deduplicated by digest) and attaches them to a log
    /// entry.
    pub fn put_attachment(
        &self,
        log_id: u64,
        bytes: &[u8],
        filename: &str,
        media_type: &str,
        actor: &ActorRef,
    ) -> Result<Attachment> {
        let size = bytes.len() as u64;
        if size > self.options.max_attachment_bytes {
            return Err(StoreError::TooLarge { size, max: self.options.max_attachment_bytes });
        }
        if filename.trim().is_empty() {
            return Err(DomainError::Invalid("attachment filename must not be empty".into()).into());
        }
        if !self.catalog.read().logs.contains_key(&log_id) {
            return Err(StoreError::NotFound(format!("log entry {log_id}")));
        }
        if self.options.read_only {
            return Err(StoreError::ReadOnly);
        }
        // An orphaned blob left by a failed commit is harmless and reused.
        let digest = self.blobs.put(bytes)?;
        let media_type = if media_type.trim().is_empty() {
            "application/octet-stream".to_string()
        } else {
            media_type.to_string()
        };
        let attachment = Attachment {
            digest,
            filename: filename.to_string(),
            media_type,
            size_bytes: size,
        };
        self.commit(actor, AuditAction::Attach, |cat, _| {
            let log = cat
                .logs
                .get(&log_id)
                .ok_or_else(|| StoreError::NotFound(format!("log entry {log_id}")))?;
            let mut next = log.clone();
            next.attachments.push(attachment.clone());
            let payload = json!({ "log_id": log_id, "attachment": attachment });
            Ok((EntityRef::log(log_id), payload, Effect::Attach { log: next, attachment: attachment.clone() }))
        })?;
        Ok(attachment)
    }

    pub fn get_attachment(&self, digest: &str) -> Result<(Vec<u8>, Attachment)> {
        let meta = self
            .catalog
            .read()
            .attachments
            .get(digest)
            .cloned()
            .ok_or_else(|| StoreError::UnknownDigest(digest.to_string()))?;
        let bytes = self
            .blobs
            .get(digest)?
            .ok_or_else(|| StoreError::UnknownDigest(digest.to_string()))?;
        Ok((bytes, meta))
    }

    pub fn get_fill(&self, fill_number: u64) -> Result<LhcFill> {
        self.catalog
            .read()
            .fills
            .get(&fill_number)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("fill {fill_number}")))
    }

    pub fn get_run(&self, run_number: u64) -> Result<Run> {
        self.catalog
            .read()
            .runs
            .get(&run_number)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("run {run_number}")))
    }

    pub fn get_pass(&self, pass_id: u64) -> Result<ReconstructionPass> {
        self.catalog
            .read()
            .passes
            .get(&pass_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("reconstruction pass {pass_id}")))
    }

    pub fn get_log(&self, log_id: u64) -> Result<LogEntry> {
        self.catalog
            .read()
            .logs
            .get(&log_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("log entry {log_id}")))
    }

    pub fn get_template(&self, name: &str) -> Result<Template> {
        self.catalog
            .read()
            .templates
            .get(name)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("template {name:?}")))
    }

    /// Runs matching `q`, newest (highest run number) first.
    pub fn list_runs(&self, q: &RunQuery, offset: u64, limit: u32) -> Result<Page<Run>> {
        q.validate()?;
        let cat = self.catalog.read();
        let matching = cat.runs.values().rev().filter(|r| match_run(r, q).unwrap_or(false));
        Ok(Page::slice(matching, offset, limit)?)
    }

    pub fn list_logs(&self, q: &LogQuery, offset: u64, limit: u32) -> Result<Page<LogEntry>> {
        q.validate()?;
        let cat = self.catalog.read();
        let matching = cat.logs.values().rev().filter(|l| match_log(l, q).unwrap_or(false));
        Ok(Page::slice(matching, offset, limit)?)
    }

    pub fn list_fills(&self, offset: u64, limit: u32) -> Result<Page<LhcFill>> {
        let cat = self.catalog.read();
        Ok(Page::slice(cat.fills.values().rev(), offset, limit)?)
    }

    pub fn list_passes(&self, q: &PassQuery, offset: u64, limit: u32) -> Result<Page<ReconstructionPass>> {
        let cat = self.catalog.read();
        let matching = cat.passes.values().rev().filter(|p| match_pass(p, q));
        Ok(Page::slice(matching, offset, limit)?)
    }

    /// Templates ordered by name.
    pub fn list_templates(&self, offset: u64, limit: u32) -> Result<Page<Template>> {
        let cat = self.catalog.read();
        Ok(Page::slice(cat.templates.values(), offset, limit)?)
    }

    /// `[PASS pass_id, ..., RUN root]`.
    pub fn lineage(&self, pass_id: u64) -> Result<Vec<EntityRef>> {
        let cat = self.catalog.read();
        cat.lineage(pass_id).map_err(|e| match e {
            DomainError::NotFound(m) => StoreError::NotFound(m),
            other => StoreError::Domain(other),
        })
    }

    /// Audit records with `seq > since`, oldest first. `total` counts all of
    /// them.
    pub fn read_audit(&self, since: u64, limit: u32) -> Result<Page<AuditRecord>> {
        let cat = self.catalog.read();
        let start = cat.audit.partition_point(|r| r.seq <= since);
        Ok(Page::slice(&cat.audit[start..], 0, limit)?)
    }

    pub fn verify_audit(&self) -> AuditReport {
        self.catalog.read().verify_audit()
    }

    pub fn check_integrity(&self) -> IntegrityReport {
        self.catalog.read().check_integrity(|d| self.blobs.contains(d))
    }

    /// Writes the store into `dest` in the `runlogexport v1` format.
    pub fn export_store(&self, dest: impl AsRef<Path>) -> Result<ExportSummary> {
        let cat = self.catalog.read();
        write_export(dest.as_ref(), &cat, |digest| self.blobs.get(digest))
    }

    /// Loads an export into this store, which must be empty.
    pub fn import_store(&self, src: impl AsRef<Path>) -> Result<ImportSummary> {
        let mut writer = self.writer.lock();
        if writer.crashed {
            return Err(StoreError::Crashed);
        }
        if writer.journal.is_none() {
            return Err(StoreError::ReadOnly);
        }
        if !self.catalog.read().is_empty() {
            return Err(StoreError::Conflict("import requires an empty store".into()));
        }
        let (catalog, blobs, summary) = read_export(src.as_ref())?;
        for bytes in blobs.values() {
            self.blobs.put(bytes)?;
        }
        let entry = JournalEntry::Restore { catalog: Box::new(catalog) };
        let line = frame(&entry)?;
        let journal = writer.journal.as_mut().expect("checked above");
        match journal.append(&line) {
            Ok(AppendOutcome::Durable) => {}
            Ok(AppendOutcome::DurableThenCrashed) | Err(StoreError::Crashed) => {
                writer.crashed = true;
                return Err(StoreError::Crashed);
            }
            Err(e) => return Err(e),
        }
        entry.apply_to(&mut self.catalog.write());
        Ok(summary)
    }
}
