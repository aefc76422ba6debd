//! Append-only commit journal.
//!
//! One commit is one line: `<sha256 of json> <json>\n`. A commit is durable
//! once its newline is written (and synced, if configured). On open, a final
//! line that is incomplete or fails its checksum is a torn write and is
//! dropped; a bad line anywhere else is corruption.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::audit::AuditRecord;
use super::catalog::{Catalog, Effect};
use super::StoreError;
use crate::canonical::sha256_hex;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub(crate) enum JournalEntry {
    Commit { audit: AuditRecord, payload: Value, effect: Effect },
    /// Whole-catalogue restore written by import.
    Restore { catalog: Box<Catalog> },
}

impl JournalEntry {
    pub(crate) fn apply_to(self, catalog: &mut Catalog) {
        match self {
            JournalEntry::Commit { audit, payload, effect } => {
                catalog.apply(effect);
                catalog.record(audit, Some(payload));
            }
            JournalEntry::Restore { catalog: restored } => {
                *catalog = *restored;
            }
        }
    }
}

pub(crate) fn frame(entry: &JournalEntry) -> Result<Vec<u8>, StoreError> {
    let json = serde_json::to_string(entry).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    let mut line = Vec::with_capacity(json.len() + 66);
    line.extend_from_slice(sha256_hex(json.as_bytes()).as_bytes());
    line.push(b' ');
    line.extend_from_slice(json.as_bytes());
    line.push(b'\n');
    Ok(line)
}

/// `Ok(None)` for a line that fails its checksum.
fn unframe(line: &[u8]) -> Result<Option<JournalEntry>, serde_json::Error> {
    if line.len() < 66 || line[64] != b' ' {
        return Ok(None);
    }
    let (digest, json) = (&line[..64], &line[65..]);
    if sha256_hex(json).as_bytes() != digest {
        return Ok(None);
    }
    serde_json::from_slice(json).map(Some)
}

/// Where in a commit an injected crash happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    /// Nothing of the commit reaches the journal.
    BeforeAppend,
    /// Part of the commit line is written, then the process dies.
    TornAppend,
    /// The commit is durable but the process dies before applying it.
    AfterAppend,
}

/// Crash the `commit`-th journal append (1-based) at `point`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultPlan {
    pub commit: u64,
    pub point: CrashPoint,
}

pub(crate) enum AppendOutcome {
    Durable,
    /// Durable, but the simulated process is gone.
    DurableThenCrashed,
}

pub(crate) struct Journal {
    file: Option<File>,
    fsync: bool,
    fault: Option<FaultPlan>,
    appends: u64,
}

impl Journal {
    pub(crate) fn memory(fault: Option<FaultPlan>) -> Self {
        Journal { file: None, fsync: false, fault, appends: 0 }
    }

    /// Opens (creating if needed) and replays the journal at `path`.
    pub(crate) fn open(
        path: &Path,
        fsync: bool,
        read_only: bool,
        fault: Option<FaultPlan>,
    ) -> Result<(Option<Self>, Catalog), StoreError> {
        let mut catalog = Catalog::default();
        let exists = path.exists();
        if read_only && !exists {
            return Ok((None, catalog));
        }
        let file = if read_only {
            File::open(path)?
        } else {
            OpenOptions::new().read(true).append(true).create(true).open(path)?
        };
        let mut reader = BufReader::new(&file);
        let mut offset = 0u64;
        let mut line = Vec::new();
        let mut line_no = 0usize;
        let mut torn_at = None;
        loop {
            line.clear();
            let n = reader.read_until(b'\n', &mut line)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let complete = line.last() == Some(&b'\n');
            let entry = if complete {
                unframe(&line[..line.len() - 1]).map_err(|e| {
                    StoreError::Corrupt(format!("journal line {line_no} is unreadable: {e}"))
                })?
            } else {
                None
            };
            match entry {
                Some(entry) => entry.apply_to(&mut catalog),
                None => {
                    // only the tail may be torn
                    let mut rest = Vec::new();
                    std::io::Read::read_to_end(&mut reader, &mut rest)?;
                    if !rest.is_empty() {
                        return Err(StoreError::Corrupt(format!(
                            "journal line {line_no} is damaged"
                        )));
                    }
                    torn_at = Some(offset);
                    break;
                }
            }
            offset += n as u64;
        }
        drop(reader);
        if read_only {
            return Ok((None, catalog));
        }
        if let Some(at) = torn_at {
            file.set_len(at)?;
            file.sync_all()?;
        }
        let mut file = file;
        file.seek(SeekFrom::End(0))?;
        Ok((Some(Journal { file: Some(file), fsync, fault, appends: 0 }), catalog))
    }

    pub(crate) fn append(&mut self, line: &[u8]) -> Result<AppendOutcome, StoreError> {
        self.appends += 1;
        let crash = self.fault.filter(|f| f.commit == self.appends).map(|f| f.point);
        match crash {
            Some(CrashPoint::BeforeAppend) => return Err(StoreError::Crashed),
            Some(CrashPoint::TornAppend) => {
                let cut = (line.len() / 2).max(1);
                self.write(&line[..cut])?;
                return Err(StoreError::Crashed);
            }
            _ => {}
        }
        self.write(line)?;
        if crash == Some(CrashPoint::AfterAppend) {
            Ok(AppendOutcome::DurableThenCrashed)
        } else {
            Ok(AppendOutcome::Durable)
        }
    }

    fn write(&mut self, bytes: &[u8]) -> io::Result<()> {
        if let Some(file) = self.file.as_mut() {
            file.write_all(bytes)?;
            if self.fsync {
                file.sync_data()?;
            }
        }
        Ok(())
    }
}
