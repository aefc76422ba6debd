//! Run lifecycle: `ONGOING` runs accept a single `END`; quality and tags can
//! change in either state.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::error::DomainError;
use super::types::{Quality, Run, RunState, Tag, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunEvent {
    End { end_time: Timestamp },
    SetQuality { quality: Quality },
    AddTag { tag: Tag },
    RemoveTag { tag: Tag },
}

pub fn apply_run_event(run: &Run, event: &RunEvent) -> Result<Run, DomainError> {
    let mut next = run.clone();
    match event {
        RunEvent::End { end_time } => {
            if run.state == RunState::Ended {
                return Err(DomainError::InvalidTransition(format!(
                    "run {} has already ended",
                    run.run_number
                )));
            }
            if *end_time < run.start_time {
                return Err(DomainError::InvalidTimestamps(format!(
                    "end {end_time} precedes start {} of run {}",
                    run.start_time, run.run_number
                )));
            }
            next.state = RunState::Ended;
            next.end_time = Some(*end_time);
        }
        RunEvent::SetQuality { quality } => next.quality = *quality,
        RunEvent::AddTag { tag } => {
            next.tags.insert(tag.clone());
        }
        RunEvent::RemoveTag { tag } => {
            if !next.tags.remove(tag) {
                return Err(DomainError::NotFound(format!(
                    "tag {tag} on run {}",
                    run.run_number
                )));
            }
        }
    }
    Ok(next)
}

pub fn run_duration(run: &Run) -> Option<Duration> {
    match (run.state, run.end_time) {
        (RunState::Ended, Some(end)) => {
            let ms = run.start_time.millis_until(end);
            Some(Duration::from_millis(ms.max(0) as u64))
        }
        _ => None,
    }
}
