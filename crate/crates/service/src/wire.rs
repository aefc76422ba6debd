//! Request and response bodies that differ from the store's own types.

use std::collections::BTreeMap;

use runlog_core::domain::{EntityRef, LogOrigin, PassStatus, Quality, RunEvent, Tag, TagSet, Timestamp};
use runlog_core::store::{LogContent, NewLog};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// `POST /logs`: either `title` + `body`, or `template_name` + `values`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub associations: Vec<EntityRef>,
    #[serde(default)]
    pub tags: TagSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<LogOrigin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<Timestamp>,
}

impl LogRequest {
    pub fn into_new_log(self) -> Result<NewLog, ApiError> {
        let content = match (self.title, self.body, self.template_name, self.values) {
            (Some(title), body, None, None) => LogContent::Direct { title, body: body.unwrap_or_default() },
            (None, None, Some(template_name), values) => {
                LogContent::Template { template_name, values: values.unwrap_or_default() }
            }
            _ => {
                return Err(ApiError::bad_request(
                    "give either title (and body) or template_name (and values)",
                ))
            }
        };
        Ok(NewLog {
            content,
            associations: self.associations,
            tags: self.tags,
            origin: self.origin,
            created_at: self.created_at,
        })
    }
}

impl From<&NewLog> for LogRequest {
    fn from(l: &NewLog) -> Self {
        let mut req = LogRequest {
            associations: l.associations.clone(),
            tags: l.tags.clone(),
            origin: l.origin,
            created_at: l.created_at,
            ..Default::default()
        };
        match &l.content {
            LogContent::Direct { title, body } => {
                req.title = Some(title.clone());
                req.body = Some(body.clone());
            }
            LogContent::Template { template_name, values } => {
                req.template_name = Some(template_name.clone());
                req.values = Some(values.clone());
            }
        }
        req
    }
}

/// `PATCH /logs/{id}`: appends a revision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogEdit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
}

/// `PATCH /runs/{runNumber}`: one lifecycle event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum RunPatch {
    /// `end_time` defaults to the server clock.
    End {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end_time: Option<Timestamp>,
    },
    SetQuality { quality: Quality },
}

impl RunPatch {
    pub fn into_event(self, now: Timestamp) -> RunEvent {
        match self {
            RunPatch::End { end_time } => RunEvent::End { end_time: end_time.unwrap_or(now) },
            RunPatch::SetQuality { quality } => RunEvent::SetQuality { quality },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagRequest {
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassPatch {
    pub status: PassStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub pass_id: u64,
    /// The pass itself first, its root run last.
    pub chain: Vec<EntityRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreHealth {
    pub reachable: bool,
    pub audit_records: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub store: StoreHealth,
}
