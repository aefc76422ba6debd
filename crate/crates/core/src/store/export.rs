//! `runlogexport v1` backup format.
//!
//! `export.runlog` holds a header line and then one `KIND\t<json>` record per
//! line, with canonical JSON (sorted keys, no whitespace) and sections in the
//! order FILL, RUN, PASS, LOG, TEMPLATE, ATTACHMENT_META, AUDIT. Attachment
//! bodies sit next to it, one file per digest.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::audit::AuditRecord;
use super::catalog::{Catalog, EntityCounts};
use super::StoreError;
use crate::canonical::{sha256_hex, to_canonical_string};
use crate::domain::{
    is_hex_digest, Attachment, EntityKind, EntityRef, LhcFill, LogEntry, ReconstructionPass, Run,
    Template,
};

pub const EXPORT_HEADER: &str = "runlogexport v1";
pub const EXPORT_FILE: &str = "export.runlog";

const SECTIONS: [&str; 7] = ["FILL", "RUN", "PASS", "LOG", "TEMPLATE", "ATTACHMENT_META", "AUDIT"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub path: PathBuf,
    pub counts: EntityCounts,
    pub blobs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub counts: EntityCounts,
    pub blobs: u64,
}

fn record<T: Serialize>(out: &mut impl Write, kind: &str, value: &T) -> Result<(), StoreError> {
    let json = to_canonical_string(value).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    writeln!(out, "{kind}\t{json}")?;
    Ok(())
}

/// Writes `catalog` into directory `dest`. `blob` fetches attachment bodies.
pub fn write_export<F>(dest: &Path, catalog: &Catalog, blob: F) -> Result<ExportSummary, StoreError>
where
    F: Fn(&str) -> io::Result<Option<Vec<u8>>>,
{
    fs::create_dir_all(dest)?;
    let path = dest.join(EXPORT_FILE);
    let mut out = BufWriter::new(fs::File::create(&path)?);
    writeln!(out, "{EXPORT_HEADER}")?;
    for fill in catalog.fills.values() {
        record(&mut out, "FILL", fill)?;
    }
    for run in catalog.runs.values() {
        record(&mut out, "RUN", run)?;
    }
    for pass in catalog.passes.values() {
        record(&mut out, "PASS", pass)?;
    }
    for log in catalog.logs.values() {
        record(&mut out, "LOG", log)?;
    }
    let mut templates: Vec<&Template> = catalog.templates.values().collect();
    templates.sort_by_key(|t| t.template_id);
    for template in templates {
        record(&mut out, "TEMPLATE", template)?;
    }
    let mut blobs = 0;
    for (digest, meta) in &catalog.attachments {
        record(&mut out, "ATTACHMENT_META", meta)?;
        let bytes = blob(digest)?.ok_or_else(|| {
            StoreError::Corrupt(format!("attachment {digest} has no stored content"))
        })?;
        fs::write(dest.join(digest), bytes)?;
        blobs += 1;
    }
    for audit in &catalog.audit {
        record(&mut out, "AUDIT", audit)?;
    }
    out.flush()?;
    out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    Ok(ExportSummary { path, counts: catalog.counts(), blobs })
}

fn parse_err(line: usize, message: impl Into<String>) -> StoreError {
    StoreError::Parse { line, message: message.into() }
}

fn parse_json<T: DeserializeOwned>(line: usize, json: &str) -> Result<T, StoreError> {
    serde_json::from_str(json).map_err(|e| parse_err(line, e.to_string()))
}

/// Parses and cross-checks an export directory. Returns the catalogue, the
/// attachment bodies keyed by digest, and a summary.
pub fn read_export(
    src: &Path,
) -> Result<(Catalog, BTreeMap<String, Vec<u8>>, ImportSummary), StoreError> {
    let text = fs::read_to_string(src.join(EXPORT_FILE))?;
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, EXPORT_HEADER)) => {}
        _ => return Err(parse_err(1, format!("expected header {EXPORT_HEADER:?}"))),
    }
    let mut cat = Catalog::default();
    let mut blobs = BTreeMap::new();
    let mut line_of: HashMap<EntityRef, usize> = HashMap::new();
    let mut audit_lines: Vec<usize> = Vec::new();
    let mut section = 0usize;
    for (n, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let (kind, json) = raw
            .split_once('\t')
            .ok_or_else(|| parse_err(n, "expected KIND<TAB>record"))?;
        let idx = SECTIONS
            .iter()
            .position(|s| *s == kind)
            .ok_or_else(|| parse_err(n, format!("unknown record kind {kind:?}")))?;
        if idx < section {
            return Err(parse_err(n, format!("{kind} record after {} section", SECTIONS[section])));
        }
        section = idx;
        let validate = |r: Result<(), crate::domain::DomainError>| r.map_err(|e| parse_err(n, e.to_string()));
        match kind {
            "FILL" => {
                let fill: LhcFill = parse_json(n, json)?;
                validate(fill.validate())?;
                line_of.insert(EntityRef::fill(fill.fill_number), n);
                if cat.fills.insert(fill.fill_number, fill).is_some() {
                    return Err(parse_err(n, "duplicate fill"));
                }
            }
            "RUN" => {
                let run: Run = parse_json(n, json)?;
                validate(run.validate())?;
                line_of.insert(EntityRef::run(run.run_number), n);
                if cat.runs.insert(run.run_number, run).is_some() {
                    return Err(parse_err(n, "duplicate run"));
                }
            }
            "PASS" => {
                let pass: ReconstructionPass = parse_json(n, json)?;
                validate(pass.validate())?;
                line_of.insert(EntityRef::pass(pass.pass_id), n);
                if cat.passes.insert(pass.pass_id, pass).is_some() {
                    return Err(parse_err(n, "duplicate reconstruction pass"));
                }
            }
            "LOG" => {
                let log: LogEntry = parse_json(n, json)?;
                validate(log.validate())?;
                line_of.insert(EntityRef::log(log.log_id), n);
                if cat.logs.insert(log.log_id, log).is_some() {
                    return Err(parse_err(n, "duplicate log entry"));
                }
            }
            "TEMPLATE" => {
                let template: Template = parse_json(n, json)?;
                validate(template.validate())?;
                if cat.template_by_id(template.template_id).is_some() {
                    return Err(parse_err(n, "duplicate template id"));
                }
                if cat.templates.insert(template.template_name.clone(), template).is_some() {
                    return Err(parse_err(n, "duplicate template name"));
                }
            }
            "ATTACHMENT_META" => {
                let meta: Attachment = parse_json(n, json)?;
                validate(meta.validate())?;
                let bytes = fs::read(src.join(&meta.digest))
                    .map_err(|e| parse_err(n, format!("attachment body {}: {e}", meta.digest)))?;
                if !is_hex_digest(&meta.digest) || sha256_hex(&bytes) != meta.digest {
                    return Err(parse_err(n, format!("attachment body {} fails its digest", meta.digest)));
                }
                if bytes.len() as u64 != meta.size_bytes {
                    return Err(parse_err(n, "attachment size does not match its body"));
                }
                blobs.insert(meta.digest.clone(), bytes);
                if cat.attachments.insert(meta.digest.clone(), meta).is_some() {
                    return Err(parse_err(n, "duplicate attachment"));
                }
            }
            "AUDIT" => {
                let audit: AuditRecord = parse_json(n, json)?;
                if audit.seq <= cat.last_seq() {
                    return Err(parse_err(n, "audit sequence numbers must increase"));
                }
                audit_lines.push(n);
                cat.audit.push(audit);
            }
            _ => unreachable!("kind checked against SECTIONS"),
        }
    }

    for run in cat.runs.values() {
        if let Some(f) = run.fill_number {
            if !cat.fills.contains_key(&f) {
                return Err(parse_err(
                    line_of[&EntityRef::run(run.run_number)],
                    format!("run {} references missing fill {f}", run.run_number),
                ));
            }
        }
    }
    for pass in cat.passes.values() {
        let line = line_of[&EntityRef::pass(pass.pass_id)];
        if !cat.exists(pass.input) {
            return Err(parse_err(
                line,
                format!("pass {} input {} does not exist", pass.pass_id, pass.input),
            ));
        }
        cat.lineage(pass.pass_id).map_err(|e| parse_err(line, e.to_string()))?;
    }
    for log in cat.logs.values() {
        let line = line_of[&EntityRef::log(log.log_id)];
        for assoc in &log.associations {
            if !cat.exists(*assoc) {
                return Err(parse_err(line, format!("log {} references missing {assoc}", log.log_id)));
            }
        }
    }
    // Attachment metadata follows logs, so check logs' digests afterwards.
    for log in cat.logs.values() {
        for att in &log.attachments {
            if !cat.attachments.contains_key(&att.digest) {
                return Err(parse_err(
                    line_of[&EntityRef::log(log.log_id)],
                    format!("log {} attachment {} has no ATTACHMENT_META", log.log_id, att.digest),
                ));
            }
        }
    }
    for (record, line) in cat.audit.iter().zip(&audit_lines) {
        let target_known = match record.target.kind {
            EntityKind::Template => cat.template_by_id(record.target.id).is_some(),
            _ => cat.exists(record.target),
        };
        if !target_known {
            return Err(parse_err(*line, format!("audit target {} does not exist", record.target)));
        }
    }
    let summary = ImportSummary { counts: cat.counts(), blobs: blobs.len() as u64 };
    Ok((cat, blobs, summary))
}
