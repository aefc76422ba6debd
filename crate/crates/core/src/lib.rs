//! Bookkeeping for a data-taking experiment: LHC fills, runs, reconstruction
//! passes and log entries, kept in an audited append-only store.

pub mod canonical;
pub mod clock;
pub mod domain;
pub mod reports;
pub mod simulator;
pub mod store;

pub use store::{Store, StoreError, StoreOptions};
