use thiserror::Error;

use super::types::{EntityKind, EntityRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
    #[error("invalid timestamps: {0}")]
    InvalidTimestamps(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("missing required field {0:?}")]
    MissingField(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid tag {0:?}: expected [a-z0-9][a-z0-9._-]{{0,63}}")]
    InvalidTag(String),
    #[error("reconstruction pass input must be RUN or PASS, got {0}")]
    InvalidInputKind(EntityKind),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("broken lineage for pass {pass_id}: {missing} does not resolve")]
    BrokenLineage { pass_id: u64, missing: EntityRef },
    #[error("corrupt lineage for pass {pass_id}: cycle through {at}")]
    CorruptLineage { pass_id: u64, at: EntityRef },
}
