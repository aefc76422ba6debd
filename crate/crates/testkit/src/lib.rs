//! Test support: brute-force reference filters written independently of the
//! predicates in `runlog_core::domain`, plus random corpus and query
//! generators.

pub mod corpus;
pub mod oracle;

use runlog_core::domain::{ActorRef, Role};

pub fn shifter() -> ActorRef {
    ActorRef::new("test-shifter", Role::Shifter).unwrap()
}

pub fn machine() -> ActorRef {
    ActorRef::new("test-daq", Role::Machine).unwrap()
}
