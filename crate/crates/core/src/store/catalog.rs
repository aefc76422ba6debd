//! In-memory image of the committed store contents.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::audit::{AuditReport, AuditRecord};
use crate::canonical::payload_digest;
use crate::domain::{
    resolve_lineage, Attachment, EntityKind, EntityRef, LhcFill, LineageNode, LogEntry,
    ReconstructionPass, Run, Template,
};

/// State change carried by one journal commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entity", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Effect {
    Fill(LhcFill),
    Run(Run),
    Pass(ReconstructionPass),
    Log(LogEntry),
    Template(Template),
    Attach { log: LogEntry, attachment: Attachment },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub fills: BTreeMap<u64, LhcFill>,
    pub runs: BTreeMap<u64, Run>,
    pub passes: BTreeMap<u64, ReconstructionPass>,
    pub logs: BTreeMap<u64, LogEntry>,
    pub templates: BTreeMap<String, Template>,
    /// Keyed by digest; the first upload of a blob names it.
    pub attachments: BTreeMap<String, Attachment>,
    /// Ascending by `seq`.
    pub audit: Vec<AuditRecord>,
    #[serde(skip)]
    pub(crate) payloads: HashMap<u64, Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCounts {
    pub fills: u64,
    pub runs: u64,
    pub passes: u64,
    pub logs: u64,
    pub templates: u64,
    pub attachments: u64,
    pub audit_records: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub violations: Vec<String>,
}

impl IntegrityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Catalog {
    pub fn is_empty(&self) -> bool {
        self.counts() == EntityCounts::default()
    }

    pub fn counts(&self) -> EntityCounts {
        EntityCounts {
            fills: self.fills.len() as u64,
            runs: self.runs.len() as u64,
            passes: self.passes.len() as u64,
            logs: self.logs.len() as u64,
            templates: self.templates.len() as u64,
            attachments: self.attachments.len() as u64,
            audit_records: self.audit.len() as u64,
        }
    }

    pub fn last_seq(&self) -> u64 {
        self.audit.last().map_or(0, |r| r.seq)
    }

    pub fn next_run_number(&self) -> u64 {
        self.runs.keys().next_back().map_or(1, |n| n + 1)
    }

    pub fn next_pass_id(&self) -> u64 {
        self.passes.keys().next_back().map_or(1, |n| n + 1)
    }

    pub fn next_log_id(&self) -> u64 {
        self.logs.keys().next_back().map_or(1, |n| n + 1)
    }

    pub fn next_template_id(&self) -> u64 {
        self.templates.values().map(|t| t.template_id).max().map_or(1, |n| n + 1)
    }

    pub fn template_by_id(&self, id: u64) -> Option<&Template> {
        self.templates.values().find(|t| t.template_id == id)
    }

    pub fn exists(&self, r: EntityRef) -> bool {
        match r.kind {
            EntityKind::Run => self.runs.contains_key(&r.id),
            EntityKind::Fill => self.fills.contains_key(&r.id),
            EntityKind::Pass => self.passes.contains_key(&r.id),
            EntityKind::Log => self.logs.contains_key(&r.id),
            EntityKind::Template => self.template_by_id(r.id).is_some(),
        }
    }

    pub fn lineage_node(&self, r: EntityRef) -> Option<LineageNode> {
        match r.kind {
            EntityKind::Run => self.runs.contains_key(&r.id).then_some(LineageNode::Run),
            EntityKind::Pass => self.passes.get(&r.id).map(|p| LineageNode::Pass { input: p.input }),
            _ => None,
        }
    }

    pub fn lineage(&self, pass_id: u64) -> Result<Vec<EntityRef>, crate::domain::DomainError> {
        resolve_lineage(pass_id, |r| self.lineage_node(r))
    }

    pub(crate) fn apply(&mut self, effect: Effect) {
        match effect {
            Effect::Fill(f) => {
                self.fills.insert(f.fill_number, f);
            }
            Effect::Run(r) => {
                self.runs.insert(r.run_number, r);
            }
            Effect::Pass(p) => {
                self.passes.insert(p.pass_id, p);
            }
            Effect::Log(l) => {
                self.logs.insert(l.log_id, l);
            }
            Effect::Template(t) => {
                self.templates.insert(t.template_name.clone(), t);
            }
            Effect::Attach { log, attachment } => {
                self.attachments.entry(attachment.digest.clone()).or_insert(attachment);
                self.logs.insert(log.log_id, log);
            }
        }
    }

    pub(crate) fn record(&mut self, audit: AuditRecord, payload: Option<Value>) {
        if let Some(p) = payload {
            self.payloads.insert(audit.seq, p);
        }
        let pos = self.audit.partition_point(|r| r.seq < audit.seq);
        self.audit.insert(pos, audit);
    }

    pub fn verify_audit(&self) -> AuditReport {
        let first_gap = self
            .audit
            .iter()
            .enumerate()
            .find(|(i, r)| r.seq != *i as u64 + 1)
            .map(|(i, _)| i as u64 + 1);
        let mut digests_checked = 0;
        let mut digest_mismatches = Vec::new();
        for record in &self.audit {
            if let Some(payload) = self.payloads.get(&record.seq) {
                digests_checked += 1;
                if payload_digest(payload) != record.payload_digest {
                    digest_mismatches.push(record.seq);
                }
            }
        }
        AuditReport {
            contiguous: first_gap.is_none(),
            count: self.audit.len() as u64,
            first_gap,
            digests_checked,
            digest_mismatches,
        }
    }

    /// Referential integrity and per-entity invariants. `blob_exists` answers
    /// whether attachment content is present.
    pub fn check_integrity(&self, blob_exists: impl Fn(&str) -> bool) -> IntegrityReport {
        let mut violations = Vec::new();
        for (&n, fill) in &self.fills {
            if fill.fill_number != n {
                violations.push(format!("fill keyed {n} has number {}", fill.fill_number));
            }
            if let Err(e) = fill.validate() {
                violations.push(format!("fill {n}: {e}"));
            }
        }
        for (&n, run) in &self.runs {
            if run.run_number != n {
                violations.push(format!("run keyed {n} has number {}", run.run_number));
            }
            if let Err(e) = run.validate() {
                violations.push(format!("run {n}: {e}"));
            }
            if let Some(f) = run.fill_number {
                if !self.fills.contains_key(&f) {
                    violations.push(format!("run {n} references missing fill {f}"));
                }
            }
        }
        for (&id, pass) in &self.passes {
            if pass.pass_id != id {
                violations.push(format!("pass keyed {id} has id {}", pass.pass_id));
            }
            if let Err(e) = pass.validate() {
                violations.push(format!("pass {id}: {e}"));
            }
            match self.lineage(id) {
                Ok(chain) if chain.last().map(|r| r.kind) == Some(EntityKind::Run) => {}
                Ok(_) => violations.push(format!("pass {id} lineage does not end in a run")),
                Err(e) => violations.push(format!("pass {id}: {e}")),
            }
        }
        for (&id, log) in &self.logs {
            if log.log_id != id {
                violations.push(format!("log keyed {id} has id {}", log.log_id));
            }
            if let Err(e) = log.validate() {
                violations.push(format!("log {id}: {e}"));
            }
            for assoc in &log.associations {
                if !self.exists(*assoc) {
                    violations.push(format!("log {id} references missing {assoc}"));
                }
            }
            for att in &log.attachments {
                if !self.attachments.contains_key(&att.digest) {
                    violations.push(format!("log {id} attachment {} has no metadata", att.digest));
                }
            }
        }
        for (name, template) in &self.templates {
            if &template.template_name != name {
                violations.push(format!("template keyed {name:?} is named {:?}", template.template_name));
            }
            if let Err(e) = template.validate() {
                violations.push(format!("template {name:?}: {e}"));
            }
        }
        for (digest, att) in &self.attachments {
            if &att.digest != digest {
                violations.push(format!("attachment keyed {digest} has digest {}", att.digest));
            }
            if !blob_exists(digest) {
                violations.push(format!("attachment {digest} has no stored content"));
            }
        }
        for record in &self.audit {
            if !self.exists(record.target) {
                violations.push(format!("audit record {} targets missing {}", record.seq, record.target));
            }
        }
        IntegrityReport { violations }
    }
}
