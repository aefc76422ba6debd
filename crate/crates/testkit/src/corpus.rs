//! Random entities and queries over a small vocabulary, so that filters hit
//! and miss in roughly equal measure.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use runlog_core::domain::{
    EntityRef, LogQuery, Quality, RunEvent, RunQuery, RunState, RunType, Tag, TagSet, Timestamp,
};
use runlog_core::store::{LogContent, NewLog, NewRun};

pub const TAGS: &[&str] = &["cosmics", "tpc", "its", "physics", "calib", "tof"];
pub const WORDS: &[&str] = &["eos", "tpc", "trip", "beam", "Rate", "HV", "noise", "ok", "shift"];
/// 2021-01-01T00:00:00Z
pub const EPOCH_MS: i64 = 1_609_459_200_000;
pub const SPAN_MS: i64 = 30 * 24 * 3_600_000;

pub fn ts(ms_after_epoch: i64) -> Timestamp {
    Timestamp::from_millis(EPOCH_MS + ms_after_epoch).unwrap()
}

pub fn random_tags(rng: &mut impl Rng, max: usize) -> TagSet {
    let n = rng.random_range(0..=max);
    TAGS.choose_multiple(rng, n).map(|t| Tag::parse(t).unwrap()).collect()
}

pub fn random_new_run(rng: &mut impl Rng, fills: &[u64]) -> NewRun {
    NewRun {
        run_type: *RunType::ALL.choose(rng).unwrap(),
        start_time: Some(ts(rng.random_range(0..SPAN_MS))),
        fill_number: if !fills.is_empty() && rng.random_bool(0.7) {
            Some(*fills.choose(rng).unwrap())
        } else {
            None
        },
        configuration: BTreeMap::new(),
        tags: random_tags(rng, 3),
    }
}

/// Events that finish a freshly created run in a random state.
pub fn random_run_events(rng: &mut impl Rng, start: Timestamp) -> Vec<RunEvent> {
    let mut events = Vec::new();
    if rng.random_bool(0.7) {
        let end = start.checked_add_millis(rng.random_range(0..86_400_000)).unwrap();
        events.push(RunEvent::End { end_time: end });
    }
    if rng.random_bool(0.6) {
        events.push(RunEvent::SetQuality { quality: *Quality::ALL.choose(rng).unwrap() });
    }
    events
}

pub fn random_sentence(rng: &mut impl Rng, words: usize) -> String {
    (0..words).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn random_new_log(rng: &mut impl Rng, runs: &[u64], fills: &[u64]) -> NewLog {
    let mut associations = Vec::new();
    if !runs.is_empty() && rng.random_bool(0.8) {
        associations.push(EntityRef::run(*runs.choose(rng).unwrap()));
    }
    if !fills.is_empty() && rng.random_bool(0.3) {
        associations.push(EntityRef::fill(*fills.choose(rng).unwrap()));
    }
    NewLog {
        content: LogContent::Direct {
            title: random_sentence(rng, 2),
            body: random_sentence(rng, 6),
        },
        associations,
        tags: random_tags(rng, 2),
        origin: None,
        created_at: Some(ts(rng.random_range(0..SPAN_MS))),
    }
}

fn maybe<R: Rng, T>(rng: &mut R, p: f64, f: impl FnOnce(&mut R) -> T) -> Option<T> {
    if rng.random_bool(p) {
        Some(f(rng))
    } else {
        None
    }
}

pub fn random_run_query(rng: &mut impl Rng, max_run: u64, fills: &[u64]) -> RunQuery {
    let max_run = max_run.max(1);
    RunQuery {
        run_number_range: maybe(rng, 0.3, |r| {
            let a = r.random_range(1..=max_run);
            let b = r.random_range(a..=max_run);
            (a, b)
        }),
        time_range: maybe(rng, 0.3, |r| {
            let a = r.random_range(0..SPAN_MS);
            let b = r.random_range(a..=SPAN_MS);
            (ts(a), ts(b))
        }),
        run_types: maybe(rng, 0.3, |r| {
            let n = r.random_range(1..=3);
            RunType::ALL.choose_multiple(r, n).copied().collect()
        }),
        qualities: maybe(rng, 0.2, |r| {
            let n = r.random_range(1..=2);
            Quality::ALL.choose_multiple(r, n).copied().collect()
        }),
        fill_number: if fills.is_empty() { None } else { maybe(rng, 0.2, |r| *fills.choose(r).unwrap()) },
        tags_all: maybe(rng, 0.4, |r| {
            let n = r.random_range(1..=2);
            TAGS.choose_multiple(r, n).map(|t| Tag::parse(t).unwrap()).collect()
        }),
        states: maybe(rng, 0.2, |r| [*RunState::ALL.choose(r).unwrap()].into_iter().collect()),
    }
}

pub fn random_log_query(rng: &mut impl Rng, runs: &[u64], authors: &[&str]) -> LogQuery {
    LogQuery {
        text: maybe(rng, 0.5, |r| {
            let n = r.random_range(1..=2);
            (0..n)
                .map(|_| {
                    let w = *WORDS.choose(r).unwrap();
                    // sometimes a fragment, sometimes shouted
                    match r.random_range(0..3) {
                        0 => w[..w.len().div_ceil(2)].to_string(),
                        1 => w.to_uppercase(),
                        _ => w.to_string(),
                    }
                })
                .collect()
        }),
        tags_all: maybe(rng, 0.3, |r| [Tag::parse(TAGS.choose(r).unwrap()).unwrap()].into_iter().collect()),
        author: if authors.is_empty() { None } else { maybe(rng, 0.2, |r| authors.choose(r).unwrap().to_string()) },
        association: if runs.is_empty() { None } else { maybe(rng, 0.2, |r| EntityRef::run(*runs.choose(r).unwrap())) },
        time_range: maybe(rng, 0.3, |r| {
            let a = r.random_range(0..SPAN_MS);
            let b = r.random_range(a..=SPAN_MS);
            (ts(a), ts(b))
        }),
    }
}
