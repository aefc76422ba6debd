//! Catalogue entities, lifecycle rules, lineage, templates and search
//! predicates. Everything here is a pure value or a pure function.

mod error;
mod lineage;
mod query;
mod run;
mod template;
mod types;

pub use error::DomainError;
pub use lineage::{resolve_lineage, LineageNode};
pub use query::{match_log, match_pass, match_run, text_tokens, LogQuery, PassQuery, RunQuery};
pub use run::{apply_run_event, run_duration, RunEvent};
pub use template::{placeholders, render_template, Rendered};
pub use types::{
    check_pass_input, check_pass_transition, is_hex_digest, ActorRef, Attachment, Configuration,
    EntityKind, EntityRef, LhcFill, LogEntry, LogOrigin, PassStatus, Quality, ReconstructionPass,
    Revision, Role, Run, RunState, RunType, Tag, TagSet, Template, Timestamp,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_normalization() {
        assert_eq!(Tag::parse("  Cosmics ").unwrap().as_str(), "cosmics");
        assert_eq!(Tag::parse("pb-pb_2023.v1").unwrap().as_str(), "pb-pb_2023.v1");
        for bad in ["", " ", "-lead", ".x", "has space", "ümlaut", &"a".repeat(65)] {
            assert!(Tag::parse(bad).is_err(), "{bad:?} should be rejected");
        }
        assert!(Tag::parse(&"a".repeat(64)).is_ok());
        let json: Result<Tag, _> = serde_json::from_str("\"BAD TAG\"");
        assert!(json.is_err());
    }

    #[test]
    fn timestamps_render_with_millis() {
        let ts = Timestamp::parse("2021-01-01T01:00:00.123456+01:00").unwrap();
        assert_eq!(ts.to_string(), "2021-01-01T00:00:00.123Z");
        assert_eq!(serde_json::to_string(&ts).unwrap(), "\"2021-01-01T00:00:00.123Z\"");
        assert_eq!(Timestamp::MIN.to_string(), "0001-01-01T00:00:00.000Z");
        assert_eq!(Timestamp::MAX.to_string(), "9999-12-31T23:59:59.999Z");
    }

    #[test]
    fn entity_ref_text_form() {
        assert_eq!("RUN:42".parse::<EntityRef>().unwrap(), EntityRef::run(42));
        assert_eq!("pass:3".parse::<EntityRef>().unwrap(), EntityRef::pass(3));
        assert!("RUN:0".parse::<EntityRef>().is_err());
        assert!("RUN".parse::<EntityRef>().is_err());
        assert_eq!(EntityRef::fill(7).to_string(), "FILL:7");
    }

    #[test]
    fn pass_input_kinds() {
        assert!(check_pass_input(EntityRef::run(1)).is_ok());
        assert!(check_pass_input(EntityRef::pass(1)).is_ok());
        assert_eq!(
            check_pass_input(EntityRef::fill(1)),
            Err(DomainError::InvalidInputKind(EntityKind::Fill))
        );
    }

    #[test]
    fn pass_status_moves_forward() {
        use PassStatus::*;
        assert!(check_pass_transition(Pending, Running).is_ok());
        assert!(check_pass_transition(Running, Done).is_ok());
        assert!(check_pass_transition(Pending, Failed).is_ok());
        assert!(check_pass_transition(Done, Failed).is_err());
        assert!(check_pass_transition(Running, Running).is_err());
        assert!(check_pass_transition(Running, Pending).is_err());
    }

    #[test]
    fn log_revisions_append() {
        let alice = ActorRef::new("alice", Role::Shifter).unwrap();
        let bob = ActorRef::new("bob", Role::RunCoordinator).unwrap();
        let t0 = Timestamp::from_millis(0).unwrap();
        let log = LogEntry::create(1, "t".into(), "b".into(), alice, LogOrigin::Human, t0, vec![], TagSet::new());
        let edited = log.with_revision(None, Some("b2".into()), bob.clone(), t0).unwrap();
        assert_eq!(edited.revisions.len(), 2);
        assert_eq!(edited.revisions[0], log.revisions[0]);
        assert_eq!((edited.title.as_str(), edited.body.as_str()), ("t", "b2"));
        assert!(edited.validate().is_ok());
        assert!(log.with_revision(None, None, bob, t0).is_err());
    }

    #[test]
    fn empty_actor_rejected() {
        assert!(ActorRef::new("  ", Role::Machine).is_err());
    }
}
