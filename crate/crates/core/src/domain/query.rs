//! Search predicates shared by the store, the HTTP layer and test oracles.
//!
//! Every filter is optional; an absent filter matches everything and present
//! filters combine with AND. Ranges are closed on both ends.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::error::DomainError;
use super::types::{
    EntityRef, LogEntry, PassStatus, Quality, ReconstructionPass, Run, RunState, RunType, TagSet,
    Timestamp,
};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunQuery {
    pub run_number_range: Option<(u64, u64)>,
    pub time_range: Option<(Timestamp, Timestamp)>,
    pub run_types: Option<BTreeSet<RunType>>,
    pub qualities: Option<BTreeSet<Quality>>,
    pub fill_number: Option<u64>,
    pub tags_all: Option<TagSet>,
    pub states: Option<BTreeSet<RunState>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogQuery {
    /// Lowercase-insensitive substring tokens; all must occur.
    pub text: Option<Vec<String>>,
    pub tags_all: Option<TagSet>,
    /// Matches `author.actor_id` exactly.
    pub author: Option<String>,
    pub association: Option<EntityRef>,
    pub time_range: Option<(Timestamp, Timestamp)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassQuery {
    pub statuses: Option<BTreeSet<PassStatus>>,
    pub input: Option<EntityRef>,
}

fn check_range<T: PartialOrd + std::fmt::Display>(
    what: &str,
    range: &Option<(T, T)>,
) -> Result<(), DomainError> {
    match range {
        Some((lo, hi)) if lo > hi => Err(DomainError::InvalidQuery(format!(
            "{what} range is reversed: {lo} > {hi}"
        ))),
        _ => Ok(()),
    }
}

fn within<T: PartialOrd>(value: T, range: &Option<(T, T)>) -> bool {
    range.as_ref().is_none_or(|(lo, hi)| *lo <= value && value <= *hi)
}

fn member<T: Ord>(value: &T, set: &Option<BTreeSet<T>>) -> bool {
    set.as_ref().is_none_or(|s| s.contains(value))
}

fn has_all(tags: &TagSet, wanted: &Option<TagSet>) -> bool {
    wanted.as_ref().is_none_or(|w| w.is_subset(tags))
}

/// Splits free text into search tokens.
pub fn text_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

impl RunQuery {
    pub fn validate(&self) -> Result<(), DomainError> {
        check_range("run number", &self.run_number_range)?;
        check_range("time", &self.time_range)
    }
}

impl LogQuery {
    pub fn validate(&self) -> Result<(), DomainError> {
        check_range("time", &self.time_range)
    }
}

pub fn match_run(run: &Run, q: &RunQuery) -> Result<bool, DomainError> {
    q.validate()?;
    Ok(within(run.run_number, &q.run_number_range)
        && within(run.start_time, &q.time_range)
        && member(&run.run_type, &q.run_types)
        && member(&run.quality, &q.qualities)
        && q.fill_number.is_none_or(|f| run.fill_number == Some(f))
        && has_all(&run.tags, &q.tags_all)
        && member(&run.state, &q.states))
}

pub fn match_log(log: &LogEntry, q: &LogQuery) -> Result<bool, DomainError> {
    q.validate()?;
    let text_ok = match &q.text {
        None => true,
        Some(tokens) => {
            let haystack = format!("{} {}", log.title, log.body).to_lowercase();
            tokens.iter().all(|t| haystack.contains(&t.to_lowercase()))
        }
    };
    Ok(text_ok
        && has_all(&log.tags, &q.tags_all)
        && q.author.as_ref().is_none_or(|a| &log.author.actor_id == a)
        && q.association.as_ref().is_none_or(|a| log.associations.contains(a))
        && within(log.created_at, &q.time_range))
}

pub fn match_pass(pass: &ReconstructionPass, q: &PassQuery) -> bool {
    member(&pass.status, &q.statuses) && q.input.is_none_or(|i| pass.input == i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::types::{ActorRef, LogOrigin, Role, Tag};
    use proptest::prelude::*;

    fn tags(list: &[&str]) -> TagSet {
        list.iter().map(|t| Tag::parse(t).unwrap()).collect()
    }

    fn run_with(n: u64, tag_list: &[&str]) -> Run {
        Run::start(
            n,
            RunType::Cosmics,
            Timestamp::from_millis(1_600_000_000_000 + n as i64 * 1000).unwrap(),
            None,
            Default::default(),
            tags(tag_list),
        )
    }

    #[test]
    fn empty_query_matches_everything() {
        assert!(match_run(&run_with(1, &[]), &RunQuery::default()).unwrap());
    }

    #[test]
    fn tags_all_is_superset() {
        let q = RunQuery { tags_all: Some(tags(&["cosmics"])), ..Default::default() };
        assert!(match_run(&run_with(1, &["cosmics", "tpc"]), &q).unwrap());
        assert!(!match_run(&run_with(1, &["tpc"]), &q).unwrap());
    }

    #[test]
    fn reversed_range_is_invalid() {
        let q = RunQuery { run_number_range: Some((5, 2)), ..Default::default() };
        assert!(matches!(match_run(&run_with(1, &[]), &q), Err(DomainError::InvalidQuery(_))));
        let lq = LogQuery {
            time_range: Some((Timestamp::MAX, Timestamp::MIN)),
            ..Default::default()
        };
        assert!(lq.validate().is_err());
    }

    #[test]
    fn text_tokens_are_case_insensitive_substrings() {
        let actor = ActorRef::new("alice", Role::Shifter).unwrap();
        let log = LogEntry::create(
            1,
            "EOS report".into(),
            "TPC trips during fill".into(),
            actor,
            LogOrigin::Human,
            Timestamp::from_millis(0).unwrap(),
            vec![],
            TagSet::new(),
        );
        let q = |s: &str| LogQuery { text: Some(text_tokens(s)), ..Default::default() };
        assert!(match_log(&log, &q("eos tpc")).unwrap());
        assert!(match_log(&log, &q("ort T")).unwrap());
        assert!(!match_log(&log, &q("eos its")).unwrap());
        // title and body are joined by a space
        assert!(match_log(&log, &q("report")).unwrap());
        assert!(!match_log(&log, &q("reporttpc")).unwrap());
    }

    fn arb_run() -> impl Strategy<Value = Run> {
        (
            1u64..200,
            prop::sample::select(RunType::ALL.to_vec()),
            prop::sample::select(Quality::ALL.to_vec()),
            prop::option::of(1u64..4),
            prop::sample::subsequence(vec!["a", "b", "c"], 0..=3),
            any::<bool>(),
        )
            .prop_map(|(n, ty, quality, fill, tag_list, ended)| {
                let mut run = run_with(n, &tag_list);
                run.run_type = ty;
                run.quality = quality;
                run.fill_number = fill;
                if ended {
                    run.state = RunState::Ended;
                    run.end_time = Some(run.start_time);
                }
                run
            })
    }

    proptest! {
        #[test]
        fn and_composition_over_disjoint_dimensions(
            run in arb_run(),
            range in prop::option::of((1u64..100, 100u64..200)),
            types in prop::option::of(prop::sample::subsequence(RunType::ALL.to_vec(), 0..=4)),
            fill in prop::option::of(1u64..4),
            tag_list in prop::option::of(prop::sample::subsequence(vec!["a", "b", "c"], 0..=3)),
        ) {
            let q1 = RunQuery {
                run_number_range: range,
                run_types: types.map(|t| t.into_iter().collect()),
                ..Default::default()
            };
            let q2 = RunQuery {
                fill_number: fill,
                tags_all: tag_list.map(|t| tags(&t)),
                ..Default::default()
            };
            let both = RunQuery { fill_number: q2.fill_number, tags_all: q2.tags_all.clone(), ..q1.clone() };
            let lhs = match_run(&run, &both).unwrap();
            let rhs = match_run(&run, &q1).unwrap() && match_run(&run, &q2).unwrap();
            prop_assert_eq!(lhs, rhs);
            // purity
            prop_assert_eq!(lhs, match_run(&run, &both).unwrap());
        }
    }
}
