use std::sync::atomic::{AtomicI64, Ordering};

use crate::domain::Timestamp;

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::now()
    }
}

/// Deterministic clock: starts at `start` and advances by `step_ms` on every
/// reading.
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicI64,
    step_ms: i64,
}

impl SteppingClock {
    pub fn new(start: Timestamp, step_ms: i64) -> Self {
        SteppingClock { next: AtomicI64::new(start.as_millis()), step_ms }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> Timestamp {
        let ms = self.next.fetch_add(self.step_ms, Ordering::SeqCst);
        Timestamp::from_millis(ms).unwrap_or(Timestamp::MAX)
    }
}
