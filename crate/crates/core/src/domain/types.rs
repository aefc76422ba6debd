use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::error::DomainError;

/// A UTC instant with millisecond precision.
///
/// Serialized as RFC 3339 with exactly three fractional digits and a `Z`
/// suffix, e.g. `2021-01-01T00:00:00.000Z`. Sub-millisecond input is
/// truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    /// 0001-01-01T00:00:00.000Z
    pub const MIN: Timestamp = Timestamp(-62_135_596_800_000);
    /// 9999-12-31T23:59:59.999Z
    pub const MAX: Timestamp = Timestamp(253_402_300_799_999);

    pub fn from_millis(ms: i64) -> Result<Self, DomainError> {
        if (Self::MIN.0..=Self::MAX.0).contains(&ms) {
            Ok(Timestamp(ms))
        } else {
            Err(DomainError::InvalidTimestamps(format!(
                "{ms} ms is outside the supported range"
            )))
        }
    }

    pub fn now() -> Self {
        Timestamp(Utc::now().timestamp_millis())
    }

    pub fn as_millis(self) -> i64 {
        self.0
    }

    pub fn parse(s: &str) -> Result<Self, DomainError> {
        let dt = DateTime::parse_from_rfc3339(s)
            .map_err(|e| DomainError::InvalidTimestamps(format!("{s:?}: {e}")))?;
        Self::from_millis(dt.with_timezone(&Utc).timestamp_millis())
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0)
            .single()
            .expect("timestamp within chrono range")
    }

    pub fn checked_add_millis(self, ms: i64) -> Option<Self> {
        self.0.checked_add(ms).and_then(|v| Self::from_millis(v).ok())
    }

    /// Milliseconds from `self` to `later`; negative when `later` is earlier.
    pub fn millis_until(self, later: Timestamp) -> i64 {
        later.0 - self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_datetime().to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

impl FromStr for Timestamp {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! text_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = DomainError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(DomainError::Invalid(format!(
                        "unknown {} value {s:?}",
                        stringify!($name)
                    ))),
                }
            }
        }
    };
}

text_enum!(
    RunType {
        Global => "GLOBAL",
        DetectorCalibration => "DETECTOR_CALIBRATION",
        Cosmics => "COSMICS",
        Technical => "TECHNICAL",
    }
);

text_enum!(
    RunState {
        Ongoing => "ONGOING",
        Ended => "ENDED",
    }
);

text_enum!(
    Quality {
        Unknown => "UNKNOWN",
        Good => "GOOD",
        Bad => "BAD",
    }
);

text_enum!(
    PassStatus {
        Pending => "PENDING",
        Running => "RUNNING",
        Done => "DONE",
        Failed => "FAILED",
    }
);

text_enum!(
    LogOrigin {
        Human => "HUMAN",
        Process => "PROCESS",
    }
);

text_enum!(
    /// Roles are recorded on every actor but not used for authorization.
    Role {
        Shifter => "SHIFTER",
        RunCoordinator => "RUN_COORDINATOR",
        Manager => "MANAGER",
        Physicist => "PHYSICIST",
        Machine => "MACHINE",
    }
);

text_enum!(
    /// `TEMPLATE` only appears as an audit target; associations and pass
    /// inputs never accept it.
    EntityKind {
        Run => "RUN",
        Fill => "FILL",
        Pass => "PASS",
        Log => "LOG",
        Template => "TEMPLATE",
    }
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityRef {
    pub kind: EntityKind,
    pub id: u64,
}

impl EntityRef {
    pub fn new(kind: EntityKind, id: u64) -> Self {
        EntityRef { kind, id }
    }

    pub fn run(id: u64) -> Self {
        Self::new(EntityKind::Run, id)
    }

    pub fn fill(id: u64) -> Self {
        Self::new(EntityKind::Fill, id)
    }

    pub fn pass(id: u64) -> Self {
        Self::new(EntityKind::Pass, id)
    }

    pub fn log(id: u64) -> Self {
        Self::new(EntityKind::Log, id)
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)
    }
}

/// Parses `KIND:id`, e.g. `RUN:42`.
impl FromStr for EntityRef {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, id) = s
            .split_once(':')
            .ok_or_else(|| DomainError::Invalid(format!("entity reference {s:?} is not KIND:id")))?;
        let id: u64 = id
            .trim()
            .parse()
            .map_err(|_| DomainError::Invalid(format!("entity reference {s:?} has a bad id")))?;
        if id == 0 {
            return Err(DomainError::Invalid(format!("entity reference {s:?} has id 0")));
        }
        Ok(EntityRef::new(kind.parse()?, id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag(String);

impl Tag {
    pub const MAX_LEN: usize = 64;

    /// Trims and lowercases `raw`, then checks it against
    /// `[a-z0-9][a-z0-9._-]{0,63}`.
    pub fn parse(raw: &str) -> Result<Tag, DomainError> {
        let value = raw.trim().to_lowercase();
        let mut chars = value.chars();
        let first_ok = chars
            .next()
            .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
        let rest_ok = chars.all(|c| {
            c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '.' | '_' | '-')
        });
        if first_ok && rest_ok && value.len() <= Self::MAX_LEN {
            Ok(Tag(value))
        } else {
            Err(DomainError::InvalidTag(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Tag {
    type Error = DomainError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Tag::parse(&value)
    }
}

impl From<Tag> for String {
    fn from(tag: Tag) -> Self {
        tag.0
    }
}

impl FromStr for Tag {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::parse(s)
    }
}

pub type TagSet = BTreeSet<Tag>;
pub type Configuration = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActorRef {
    pub actor_id: String,
    pub role: Role,
}

impl ActorRef {
    pub fn new(actor_id: impl Into<String>, role: Role) -> Result<Self, DomainError> {
        let actor = ActorRef { actor_id: actor_id.into(), role };
        actor.validate()?;
        Ok(actor)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.actor_id.trim().is_empty() {
            return Err(DomainError::Invalid("actor_id must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhcFill {
    pub fill_number: u64,
    pub stable_beams_start: Option<Timestamp>,
    pub stable_beams_end: Option<Timestamp>,
    pub beam_type: String,
    pub created_at: Timestamp,
}

impl LhcFill {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.fill_number == 0 {
            return Err(DomainError::Invalid("fill_number must be positive".into()));
        }
        if let (Some(start), Some(end)) = (self.stable_beams_start, self.stable_beams_end) {
            if start > end {
                return Err(DomainError::InvalidTimestamps(format!(
                    "stable beams start {start} is after end {end}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub run_number: u64,
    pub run_type: RunType,
    pub state: RunState,
    pub start_time: Timestamp,
    pub end_time: Option<Timestamp>,
    pub fill_number: Option<u64>,
    pub configuration: Configuration,
    pub quality: Quality,
    pub tags: TagSet,
    pub data_set_id: String,
}

impl Run {
    /// A freshly started run: `ONGOING`, quality `UNKNOWN`.
    pub fn start(
        run_number: u64,
        run_type: RunType,
        start_time: Timestamp,
        fill_number: Option<u64>,
        configuration: Configuration,
        tags: TagSet,
    ) -> Self {
        Run {
            run_number,
            run_type,
            state: RunState::Ongoing,
            start_time,
            end_time: None,
            fill_number,
            configuration,
            quality: Quality::Unknown,
            tags,
            data_set_id: Self::data_set_id_for(run_number),
        }
    }

    pub fn data_set_id_for(run_number: u64) -> String {
        format!("run-{run_number}")
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.run_number == 0 {
            return Err(DomainError::Invalid("run_number must be positive".into()));
        }
        if self.data_set_id != Self::data_set_id_for(self.run_number) {
            return Err(DomainError::Invalid(format!(
                "data_set_id {:?} does not match run {}",
                self.data_set_id, self.run_number
            )));
        }
        match (self.state, self.end_time) {
            (RunState::Ongoing, None) => {}
            (RunState::Ended, Some(end)) if end >= self.start_time => {}
            (RunState::Ended, Some(end)) => {
                return Err(DomainError::InvalidTimestamps(format!(
                    "run {} ends at {end} before it starts at {}",
                    self.run_number, self.start_time
                )))
            }
            (RunState::Ongoing, Some(_)) => {
                return Err(DomainError::Invalid(format!(
                    "ongoing run {} has an end_time",
                    self.run_number
                )))
            }
            (RunState::Ended, None) => {
                return Err(DomainError::Invalid(format!(
                    "ended run {} has no end_time",
                    self.run_number
                )))
            }
        }
        if self.fill_number == Some(0) {
            return Err(DomainError::Invalid("fill_number must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructionPass {
    pub pass_id: u64,
    pub name: String,
    pub input: EntityRef,
    pub configuration: Configuration,
    pub status: PassStatus,
    pub created_at: Timestamp,
}

impl ReconstructionPass {
    /// Shape checks only; resolving `input` needs the rest of the catalogue.
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.pass_id == 0 {
            return Err(DomainError::Invalid("pass_id must be positive".into()));
        }
        check_pass_input(self.input)
    }
}

pub fn check_pass_input(input: EntityRef) -> Result<(), DomainError> {
    match input.kind {
        EntityKind::Run | EntityKind::Pass if input.id > 0 => Ok(()),
        EntityKind::Run | EntityKind::Pass => {
            Err(DomainError::Invalid("pass input id must be positive".into()))
        }
        other => Err(DomainError::InvalidInputKind(other)),
    }
}

/// Pass status only moves forward; `DONE` and `FAILED` are terminal.
pub fn check_pass_transition(from: PassStatus, to: PassStatus) -> Result<(), DomainError> {
    let rank = |s: PassStatus| match s {
        PassStatus::Pending => 0,
        PassStatus::Running => 1,
        PassStatus::Done | PassStatus::Failed => 2,
    };
    if rank(to) > rank(from) {
        Ok(())
    } else {
        Err(DomainError::InvalidTransition(format!("pass status {from} -> {to}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub digest: String,
    pub filename: String,
    pub media_type: String,
    pub size_bytes: u64,
}

impl Attachment {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !is_hex_digest(&self.digest) {
            return Err(DomainError::Invalid(format!(
                "attachment digest {:?} is not 64 lowercase hex characters",
                self.digest
            )));
        }
        Ok(())
    }
}

pub fn is_hex_digest(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub revision_index: u32,
    pub title: String,
    pub body: String,
    pub edited_by: ActorRef,
    pub edited_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub log_id: u64,
    /// Mirrors the last revision.
    pub title: String,
    /// Mirrors the last revision.
    pub body: String,
    pub author: ActorRef,
    pub origin: LogOrigin,
    pub created_at: Timestamp,
    pub associations: Vec<EntityRef>,
    pub tags: TagSet,
    pub attachments: Vec<Attachment>,
    pub revisions: Vec<Revision>,
}

impl LogEntry {
    #[allow(clippy::too_many_arguments)]
    pub fn create(
        log_id: u64,
        title: String,
        body: String,
        author: ActorRef,
        origin: LogOrigin,
        created_at: Timestamp,
        associations: Vec<EntityRef>,
        tags: TagSet,
    ) -> Self {
        let first = Revision {
            revision_index: 0,
            title: title.clone(),
            body: body.clone(),
            edited_by: author.clone(),
            edited_at: created_at,
        };
        LogEntry {
            log_id,
            title,
            body,
            author,
            origin,
            created_at,
            associations,
            tags,
            attachments: Vec::new(),
            revisions: vec![first],
        }
    }

    /// Returns a copy with a new revision appended. Earlier revisions are
    /// untouched.
    pub fn with_revision(
        &self,
        title: Option<String>,
        body: Option<String>,
        edited_by: ActorRef,
        edited_at: Timestamp,
    ) -> Result<LogEntry, DomainError> {
        if title.is_none() && body.is_none() {
            return Err(DomainError::Invalid("an edit needs a new title or body".into()));
        }
        let mut next = self.clone();
        next.title = title.unwrap_or_else(|| self.title.clone());
        next.body = body.unwrap_or_else(|| self.body.clone());
        next.revisions.push(Revision {
            revision_index: self.revisions.len() as u32,
            title: next.title.clone(),
            body: next.body.clone(),
            edited_by,
            edited_at,
        });
        Ok(next)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.log_id == 0 {
            return Err(DomainError::Invalid("log_id must be positive".into()));
        }
        self.author.validate()?;
        for assoc in &self.associations {
            if !matches!(assoc.kind, EntityKind::Run | EntityKind::Fill | EntityKind::Pass) {
                return Err(DomainError::Invalid(format!(
                    "log entries cannot be associated with {}",
                    assoc.kind
                )));
            }
        }
        for (i, rev) in self.revisions.iter().enumerate() {
            if rev.revision_index as usize != i {
                return Err(DomainError::Invalid(format!(
                    "log {} revision indices are not contiguous",
                    self.log_id
                )));
            }
        }
        let last = self
            .revisions
            .last()
            .ok_or_else(|| DomainError::Invalid(format!("log {} has no revisions", self.log_id)))?;
        if last.title != self.title || last.body != self.body {
            return Err(DomainError::Invalid(format!(
                "log {} current content differs from its last revision",
                self.log_id
            )));
        }
        for att in &self.attachments {
            att.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub template_id: u64,
    pub template_name: String,
    pub title_pattern: String,
    pub body_pattern: String,
    pub required_fields: BTreeSet<String>,
    pub default_tags: TagSet,
}
