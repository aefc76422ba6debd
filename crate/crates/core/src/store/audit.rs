use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{ActorRef, EntityRef, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuditAction {
    CreateFill,
    CreateRun,
    EndRun,
    SetQuality,
    TagRun,
    UntagRun,
    CreatePass,
    SetPassStatus,
    CreateLog,
    EditLog,
    Attach,
    CreateTemplate,
}

impl AuditAction {
    pub const ALL: &'static [AuditAction] = &[
        AuditAction::CreateFill,
        AuditAction::CreateRun,
        AuditAction::EndRun,
        AuditAction::SetQuality,
        AuditAction::TagRun,
        AuditAction::UntagRun,
        AuditAction::CreatePass,
        AuditAction::SetPassStatus,
        AuditAction::CreateLog,
        AuditAction::EditLog,
        AuditAction::Attach,
        AuditAction::CreateTemplate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditAction::CreateFill => "CREATE_FILL",
            AuditAction::CreateRun => "CREATE_RUN",
            AuditAction::EndRun => "END_RUN",
            AuditAction::SetQuality => "SET_QUALITY",
            AuditAction::TagRun => "TAG_RUN",
            AuditAction::UntagRun => "UNTAG_RUN",
            AuditAction::CreatePass => "CREATE_PASS",
            AuditAction::SetPassStatus => "SET_PASS_STATUS",
            AuditAction::CreateLog => "CREATE_LOG",
            AuditAction::EditLog => "EDIT_LOG",
            AuditAction::Attach => "ATTACH",
            AuditAction::CreateTemplate => "CREATE_TEMPLATE",
        }
    }
}

impl fmt::Display for AuditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Immutable trace of one successful mutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub actor: ActorRef,
    pub action: AuditAction,
    pub target: EntityRef,
    /// SHA-256 of the canonical mutation payload.
    pub payload_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub contiguous: bool,
    pub count: u64,
    pub first_gap: Option<u64>,
    /// Records whose payload was available and re-hashed.
    pub digests_checked: u64,
    pub digest_mismatches: Vec<u64>,
}

impl AuditReport {
    pub fn is_ok(&self) -> bool {
        self.contiguous && self.digest_mismatches.is_empty()
    }
}
