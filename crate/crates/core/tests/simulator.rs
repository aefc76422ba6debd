use std::sync::Arc;

use runlog_core::clock::SteppingClock;
use runlog_core::domain::Timestamp;
use runlog_core::reports::overview;
use runlog_core::simulator::{generate, replay, DirectTarget, SimConfig};
use runlog_core::store::{Store, StoreOptions};
use runlog_testkit::machine;

#[test]
fn zero_fills_gives_an_empty_dataset() {
    let d = generate(&SimConfig::with_seed(3, 0)).unwrap();
    assert!(d.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let summary = d.export(dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(summary.path).unwrap(), "runlogexport v1\n");
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate(&SimConfig::with_seed(42, 10)).unwrap().export(a.path()).unwrap();
    generate(&SimConfig::with_seed(42, 10)).unwrap().export(b.path()).unwrap();
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("export.runlog")).unwrap();
    assert_eq!(read(&a), read(&b));
    let c = tempfile::tempdir().unwrap();
    generate(&SimConfig::with_seed(43, 10)).unwrap().export(c.path()).unwrap();
    assert_ne!(read(&a), read(&c));
}

#[test]
fn generated_datasets_are_valid_and_near_the_target_size() {
    for seed in 0..8 {
        let d = generate(&SimConfig::with_seed(seed, 50)).unwrap();
        d.validate().unwrap();
        let runs = d.catalog.runs.len() as f64;
        assert!((runs - 2800.0).abs() <= 0.15 * 2800.0, "seed {seed}: {runs} runs");
        let r = overview(&d.catalog, Timestamp::MIN, Timestamp::MAX).unwrap();
        assert!((r.mean_runs_per_fill - 56.0).abs() <= 0.15 * 56.0, "seed {seed}: {}", r.mean_runs_per_fill);
        assert!((r.logs_per_run - 0.7).abs() <= 0.2 * 0.7, "seed {seed}: {}", r.logs_per_run);
        assert!(r.fills_with_runs <= 50);
        assert!(!d.catalog.passes.is_empty());
        assert!(!d.template_uses.is_empty());
    }
}

#[test]
fn invalid_config_is_rejected() {
    let mut c = SimConfig::with_seed(1, 1);
    c.p_pass_per_run = 1.5;
    assert!(generate(&c).is_err());
    let mut c = SimConfig::with_seed(1, 1);
    c.min_duration_secs = 10.0;
    c.max_duration_secs = 5.0;
    assert!(generate(&c).is_err());
}

#[test]
fn direct_replay_is_lossless() {
    let d = generate(&SimConfig::with_seed(9, 6)).unwrap();
    let store = Store::in_memory(StoreOptions {
        fsync: false,
        clock: Arc::new(SteppingClock::new(Timestamp::parse("2030-01-01T00:00:00Z").unwrap(), 1)),
        ..Default::default()
    });
    let report = replay(&d, &mut DirectTarget { store: &store, actor: machine() }).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    let got = store.snapshot();
    assert_eq!(got.fills, d.catalog.fills);
    assert_eq!(got.runs, d.catalog.runs);
    assert_eq!(got.passes, d.catalog.passes);
    assert_eq!(got.logs, d.catalog.logs);
    assert_eq!(got.templates, d.catalog.templates);
    assert_eq!(got.audit.len() as u64, report.requests);
    assert!(store.verify_audit().is_ok());
    let (a, b) = (
        overview(&got, Timestamp::MIN, Timestamp::MAX).unwrap(),
        overview(&d.catalog, Timestamp::MIN, Timestamp::MAX).unwrap(),
    );
    assert_eq!(a, b);
}
