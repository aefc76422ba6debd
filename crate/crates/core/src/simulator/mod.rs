//! Seeded stand-in for the data-taking system.
//!
//! [`generate`] builds a self-consistent dataset of fills, runs, passes and
//! log entries from a [`SimConfig`]; [`replay`] pushes a dataset into any
//! [`ReplayTarget`] (the store directly, or the HTTP API).
//!
//! # Generator
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` and is consumed in
//! a fixed order, so a config always yields the same dataset.
//!
//! For each fill slot, in time order:
//! 1. runs outside any fill: `Poisson(mean * p / (1 - p))`, so that a
//!    fraction `p = p_run_without_fill` of all runs carries no fill;
//! 2. the fill itself, holding `min(Poisson(mean), 200)` back-to-back runs.
//!
//! Run durations are log-uniform on `[min_duration_secs, max_duration_secs]`.
//! With probability `p_pass_per_run` a run gets a pass chain of uniform depth
//! `1..=max_pass_chain`. Each run gets `Poisson(logs_per_run)` log entries, a
//! fraction `p_template_log` of them rendered from built-in templates.

mod generate;
mod replay;

pub use generate::{builtin_templates, generate, SimDataset, TemplateUse};
pub use replay::{replay, DirectTarget, ReplayError, ReplayFailure, ReplayReport, ReplayTarget, TargetError};

use serde::{Deserialize, Serialize};

use crate::domain::{DomainError, Timestamp};

pub const MAX_RUNS_PER_FILL: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub n_fills: u64,
    pub mean_runs_per_fill: f64,
    pub p_run_without_fill: f64,
    pub min_duration_secs: f64,
    pub max_duration_secs: f64,
    pub p_pass_per_run: f64,
    pub max_pass_chain: u32,
    pub logs_per_run: f64,
    pub p_template_log: f64,
    /// Time of the first generated activity.
    pub start: Timestamp,
    pub first_fill_number: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            n_fills: 50,
            mean_runs_per_fill: 56.0,
            p_run_without_fill: 0.05,
            min_duration_secs: 180.0,
            max_duration_secs: 108_000.0,
            p_pass_per_run: 0.3,
            max_pass_chain: 3,
            logs_per_run: 0.7,
            p_template_log: 0.3,
            start: Timestamp::parse("2022-07-05T00:00:00Z").expect("valid literal"),
            first_fill_number: 7_900,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64, n_fills: u64) -> Self {
        SimConfig { seed, n_fills, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(DomainError::Invalid(format!("{name} must be a probability, got {p}")))
            }
        };
        prob("p_run_without_fill", self.p_run_without_fill)?;
        prob("p_pass_per_run", self.p_pass_per_run)?;
        prob("p_template_log", self.p_template_log)?;
        if !(self.mean_runs_per_fill.is_finite() && self.mean_runs_per_fill > 0.0) {
            return Err(DomainError::Invalid("mean_runs_per_fill must be positive".into()));
        }
        if !(self.logs_per_run.is_finite() && self.logs_per_run >= 0.0) {
            return Err(DomainError::Invalid("logs_per_run must be non-negative".into()));
        }
        if !(self.min_duration_secs > 0.0 && self.min_duration_secs <= self.max_duration_secs) {
            return Err(DomainError::Invalid("duration bounds must satisfy 0 < min <= max".into()));
        }
        if self.max_pass_chain == 0 {
            return Err(DomainError::Invalid("max_pass_chain must be positive".into()));
        }
        if self.first_fill_number == 0 {
            return Err(DomainError::Invalid("first_fill_number must be positive".into()));
        }
        Ok(())
    }
}
