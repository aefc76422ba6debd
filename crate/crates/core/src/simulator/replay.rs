//! Pushes a generated dataset through a target's public operations, parents
//! before children: templates, fills, runs, passes, logs.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SimDataset;
use crate::domain::{ActorRef, EntityKind, EntityRef, PassStatus, Quality, RunEvent, RunState};
use crate::store::{LogContent, NewFill, NewLog, NewPass, NewRun, NewTemplate, Store, StoreError};

#[derive(Debug, Error)]
pub enum TargetError {
    /// The target cannot be reached at all; replay stops.
    #[error("connection failed: {0}")]
    Unreachable(String),
    /// The target refused this one request.
    #[error("{0}")]
    Rejected(String),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("connection failed: {0}")]
    ConnectionFailed(String),
}

/// Operations a replay needs. Identifiers returned are the target's own.
pub trait ReplayTarget {
    /// Cheap reachability probe made before the first request.
    fn ping(&mut self) -> Result<(), TargetError>;
    fn create_template(&mut self, t: &NewTemplate) -> Result<(), TargetError>;
    fn create_fill(&mut self, f: &NewFill) -> Result<u64, TargetError>;
    fn create_run(&mut self, r: &NewRun) -> Result<u64, TargetError>;
    fn mutate_run(&mut self, run_number: u64, event: &RunEvent) -> Result<(), TargetError>;
    fn create_pass(&mut self, p: &NewPass) -> Result<u64, TargetError>;
    fn set_pass_status(&mut self, pass_id: u64, status: PassStatus) -> Result<(), TargetError>;
    /// `author` is a hint; authenticated targets use their own identity.
    fn create_log(&mut self, l: &NewLog, author: &ActorRef) -> Result<u64, TargetError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFailure {
    pub request: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub requests: u64,
    pub failures: Vec<ReplayFailure>,
    pub elapsed: Duration,
}

struct Session<'t, T: ReplayTarget + ?Sized> {
    target: &'t mut T,
    report: ReplayReport,
}

impl<T: ReplayTarget + ?Sized> Session<'_, T> {
    fn call<R>(
        &mut self,
        describe: impl FnOnce() -> String,
        op: impl FnOnce(&mut T) -> Result<R, TargetError>,
    ) -> Result<Option<R>, ReplayError> {
        self.report.requests += 1;
        match op(self.target) {
            Ok(v) => Ok(Some(v)),
            Err(TargetError::Unreachable(m)) => Err(ReplayError::ConnectionFailed(m)),
            Err(TargetError::Rejected(error)) => {
                self.report.failures.push(ReplayFailure { request: describe(), error });
                Ok(None)
            }
        }
    }
}

pub fn replay<T: ReplayTarget + ?Sized>(
    dataset: &SimDataset,
    target: &mut T,
) -> Result<ReplayReport, ReplayError> {
    let started = Instant::now();
    target.ping().map_err(|e| ReplayError::ConnectionFailed(e.to_string()))?;
    let mut s = Session { target, report: ReplayReport::default() };
    let cat = &dataset.catalog;

    let mut templates: Vec<_> = cat.templates.values().collect();
    templates.sort_by_key(|t| t.template_id);
    for t in templates {
        let new = NewTemplate {
            template_name: t.template_name.clone(),
            title_pattern: t.title_pattern.clone(),
            body_pattern: t.body_pattern.clone(),
            required_fields: t.required_fields.clone(),
            default_tags: t.default_tags.clone(),
        };
        s.call(|| format!("create template {}", t.template_name), |x| x.create_template(&new))?;
    }

    for fill in cat.fills.values() {
        let new = NewFill {
            fill_number: fill.fill_number,
            stable_beams_start: fill.stable_beams_start,
            stable_beams_end: fill.stable_beams_end,
            beam_type: fill.beam_type.clone(),
            created_at: Some(fill.created_at),
        };
        s.call(|| format!("create fill {}", fill.fill_number), |x| x.create_fill(&new))?;
    }

    let mut run_ids: HashMap<u64, u64> = HashMap::new();
    for run in cat.runs.values() {
        let new = NewRun {
            run_type: run.run_type,
            start_time: Some(run.start_time),
            fill_number: run.fill_number,
            configuration: run.configuration.clone(),
            tags: run.tags.clone(),
        };
        let Some(id) = s.call(|| format!("create run {}", run.run_number), |x| x.create_run(&new))? else {
            continue;
        };
        run_ids.insert(run.run_number, id);
        if run.state == RunState::Ended {
            let event = RunEvent::End { end_time: run.end_time.expect("ended run has end_time") };
            s.call(|| format!("end run {}", run.run_number), |x| x.mutate_run(id, &event))?;
        }
        if run.quality != Quality::Unknown {
            let event = RunEvent::SetQuality { quality: run.quality };
            s.call(|| format!("set quality of run {}", run.run_number), |x| x.mutate_run(id, &event))?;
        }
    }

    let mut pass_ids: HashMap<u64, u64> = HashMap::new();
    let map_ref = |r: EntityRef, runs: &HashMap<u64, u64>, passes: &HashMap<u64, u64>| match r.kind {
        EntityKind::Run => runs.get(&r.id).map(|&id| EntityRef::run(id)),
        EntityKind::Pass => passes.get(&r.id).map(|&id| EntityRef::pass(id)),
        _ => Some(r),
    };
    for pass in cat.passes.values() {
        let Some(input) = map_ref(pass.input, &run_ids, &pass_ids) else {
            s.report.failures.push(ReplayFailure {
                request: format!("create pass {}", pass.pass_id),
                error: format!("skipped: input {} was not created", pass.input),
            });
            continue;
        };
        let new = NewPass {
            name: pass.name.clone(),
            input,
            configuration: pass.configuration.clone(),
            created_at: Some(pass.created_at),
        };
        let Some(id) = s.call(|| format!("create pass {}", pass.pass_id), |x| x.create_pass(&new))? else {
            continue;
        };
        pass_ids.insert(pass.pass_id, id);
        if pass.status != PassStatus::Pending {
            s.call(|| format!("set status of pass {}", pass.pass_id), |x| x.set_pass_status(id, pass.status))?;
        }
    }

    for log in cat.logs.values() {
        let associations: Option<Vec<EntityRef>> =
            log.associations.iter().map(|a| map_ref(*a, &run_ids, &pass_ids)).collect();
        let Some(associations) = associations else {
            s.report.failures.push(ReplayFailure {
                request: format!("create log {}", log.log_id),
                error: "skipped: an associated entity was not created".into(),
            });
            continue;
        };
        let (content, tags) = match dataset.template_uses.get(&log.log_id) {
            Some(u) => (
                LogContent::Template { template_name: u.template_name.clone(), values: u.values.clone() },
                u.extra_tags.clone(),
            ),
            None => (LogContent::Direct { title: log.title.clone(), body: log.body.clone() }, log.tags.clone()),
        };
        let new = NewLog {
            content,
            associations,
            tags,
            origin: Some(log.origin),
            created_at: Some(log.created_at),
        };
        s.call(|| format!("create log {}", log.log_id), |x| x.create_log(&new, &log.author))?;
    }

    s.report.elapsed = started.elapsed();
    Ok(s.report)
}

/// Replays straight into a store, recording each entity's own author where
/// the dataset has one and `actor` otherwise.
pub struct DirectTarget<'a> {
    pub store: &'a Store,
    pub actor: ActorRef,
}

fn rejected(e: StoreError) -> TargetError {
    TargetError::Rejected(e.to_string())
}

impl ReplayTarget for DirectTarget<'_> {
    fn ping(&mut self) -> Result<(), TargetError> {
        Ok(())
    }

    fn create_template(&mut self, t: &NewTemplate) -> Result<(), TargetError> {
        self.store.create_template(t.clone(), &self.actor).map(|_| ()).map_err(rejected)
    }

    fn create_fill(&mut self, f: &NewFill) -> Result<u64, TargetError> {
        self.store.create_fill(f.clone(), &self.actor).map(|f| f.fill_number).map_err(rejected)
    }

    fn create_run(&mut self, r: &NewRun) -> Result<u64, TargetError> {
        self.store.create_run(r.clone(), &self.actor).map(|r| r.run_number).map_err(rejected)
    }

    fn mutate_run(&mut self, run_number: u64, event: &RunEvent) -> Result<(), TargetError> {
        self.store.mutate_run(run_number, event.clone(), &self.actor).map(|_| ()).map_err(rejected)
    }

    fn create_pass(&mut self, p: &NewPass) -> Result<u64, TargetError> {
        self.store.create_pass(p.clone(), &self.actor).map(|p| p.pass_id).map_err(rejected)
    }

    fn set_pass_status(&mut self, pass_id: u64, status: PassStatus) -> Result<(), TargetError> {
        self.store.set_pass_status(pass_id, status, &self.actor).map(|_| ()).map_err(rejected)
    }

    fn create_log(&mut self, l: &NewLog, author: &ActorRef) -> Result<u64, TargetError> {
        self.store.create_log(l.clone(), author).map(|l| l.log_id).map_err(rejected)
    }
}
