//! Aggregate statistics for operational reporting.
//!
//! Entities are counted when their anchor time falls in `[from, to)`: fills
//! and passes and logs by `created_at`, runs by `start_time`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{run_duration, DomainError, Timestamp};
use crate::store::Catalog;

/// Upper edges (exclusive, seconds) of the duration buckets; the last bucket
/// is open-ended.
pub const BUCKET_EDGES_SECS: [u64; 4] = [600, 3_600, 21_600, 86_400];
pub const BUCKET_LABELS: [&str; 5] = ["<10m", "10m-1h", "1h-6h", "6h-24h", ">=24h"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub label: String,
    pub min_seconds: u64,
    pub max_seconds: Option<u64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverviewReport {
    pub from: Timestamp,
    pub to: Timestamp,
    pub fill_count: u64,
    pub run_count: u64,
    pub log_count: u64,
    pub pass_count: u64,
    /// Runs in range that belong to a fill.
    pub runs_with_fill: u64,
    /// Distinct fills with at least one run in range.
    pub fills_with_runs: u64,
    /// `runs_with_fill / fills_with_runs`, 0 when there are none.
    pub mean_runs_per_fill: f64,
    pub runs_without_fill: u64,
    /// `log_count / run_count`, 0 when there are no runs.
    pub logs_per_run: f64,
    /// Ended runs by duration.
    pub duration_histogram: Vec<HistogramBucket>,
    pub tag_frequency: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillRunCount {
    pub fill_number: u64,
    pub run_count: u64,
}

fn check_range(from: Timestamp, to: Timestamp) -> Result<(), DomainError> {
    if from > to {
        return Err(DomainError::InvalidQuery(format!("report range is reversed: {from} > {to}")));
    }
    Ok(())
}

fn bucket_of(seconds: u64) -> usize {
    BUCKET_EDGES_SECS.iter().position(|&edge| seconds < edge).unwrap_or(BUCKET_EDGES_SECS.len())
}

fn empty_histogram() -> Vec<HistogramBucket> {
    BUCKET_LABELS
        .iter()
        .enumerate()
        .map(|(i, label)| HistogramBucket {
            label: label.to_string(),
            min_seconds: if i == 0 { 0 } else { BUCKET_EDGES_SECS[i - 1] },
            max_seconds: BUCKET_EDGES_SECS.get(i).copied(),
            count: 0,
        })
        .collect()
}

pub fn overview(cat: &Catalog, from: Timestamp, to: Timestamp) -> Result<OverviewReport, DomainError> {
    check_range(from, to)?;
    let in_range = |t: Timestamp| from <= t && t < to;
    let mut report = OverviewReport {
        from,
        to,
        fill_count: cat.fills.values().filter(|f| in_range(f.created_at)).count() as u64,
        run_count: 0,
        log_count: cat.logs.values().filter(|l| in_range(l.created_at)).count() as u64,
        pass_count: cat.passes.values().filter(|p| in_range(p.created_at)).count() as u64,
        runs_with_fill: 0,
        fills_with_runs: 0,
        mean_runs_per_fill: 0.0,
        runs_without_fill: 0,
        logs_per_run: 0.0,
        duration_histogram: empty_histogram(),
        tag_frequency: BTreeMap::new(),
    };
    let mut per_fill: BTreeMap<u64, u64> = BTreeMap::new();
    for run in cat.runs.values().filter(|r| in_range(r.start_time)) {
        report.run_count += 1;
        match run.fill_number {
            Some(f) => *per_fill.entry(f).or_default() += 1,
            None => report.runs_without_fill += 1,
        }
        if let Some(d) = run_duration(run) {
            report.duration_histogram[bucket_of(d.as_secs())].count += 1;
        }
        for tag in &run.tags {
            *report.tag_frequency.entry(tag.to_string()).or_default() += 1;
        }
    }
    report.runs_with_fill = per_fill.values().sum();
    report.fills_with_runs = per_fill.len() as u64;
    if report.fills_with_runs > 0 {
        report.mean_runs_per_fill = report.runs_with_fill as f64 / report.fills_with_runs as f64;
    }
    if report.run_count > 0 {
        report.logs_per_run = report.log_count as f64 / report.run_count as f64;
    }
    Ok(report)
}

/// One row per fill with runs starting in range, most runs first (ties by
/// fill number).
pub fn runs_per_fill(cat: &Catalog, from: Timestamp, to: Timestamp) -> Result<Vec<FillRunCount>, DomainError> {
    check_range(from, to)?;
    let mut per_fill: BTreeMap<u64, u64> = BTreeMap::new();
    for run in cat.runs.values().filter(|r| from <= r.start_time && r.start_time < to) {
        if let Some(f) = run.fill_number {
            *per_fill.entry(f).or_default() += 1;
        }
    }
    let mut rows: Vec<FillRunCount> = per_fill
        .into_iter()
        .map(|(fill_number, run_count)| FillRunCount { fill_number, run_count })
        .collect();
    rows.sort_by(|a, b| b.run_count.cmp(&a.run_count).then(a.fill_number.cmp(&b.fill_number)));
    Ok(rows)
}

/// `metric,value` rows; histogram and tag rows are prefixed `duration:` and
/// `tag:`.
pub fn overview_csv(report: &OverviewReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]).expect("in-memory csv");
    row("metric", "value".into());
    row("from", report.from.to_string());
    row("to", report.to.to_string());
    row("fill_count", report.fill_count.to_string());
    row("run_count", report.run_count.to_string());
    row("log_count", report.log_count.to_string());
    row("pass_count", report.pass_count.to_string());
    row("runs_with_fill", report.runs_with_fill.to_string());
    row("fills_with_runs", report.fills_with_runs.to_string());
    row("mean_runs_per_fill", report.mean_runs_per_fill.to_string());
    row("runs_without_fill", report.runs_without_fill.to_string());
    row("logs_per_run", report.logs_per_run.to_string());
    for b in &report.duration_histogram {
        row(&format!("duration:{}", b.label), b.count.to_string());
    }
    for (tag, n) in &report.tag_frequency {
        row(&format!("tag:{tag}"), n.to_string());
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn runs_per_fill_csv(rows: &[FillRunCount]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fill_number", "run_count"]).expect("in-memory csv");
    for r in rows {
        w.write_record([r.fill_number.to_string(), r.run_count.to_string()]).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket_of(0), 0);
        assert_eq!(bucket_of(599), 0);
        assert_eq!(bucket_of(600), 1);
        assert_eq!(bucket_of(3_599), 1);
        assert_eq!(bucket_of(3_600), 2);
        assert_eq!(bucket_of(21_600), 3);
        assert_eq!(bucket_of(86_399), 3);
        assert_eq!(bucket_of(86_400), 4);
        assert_eq!(bucket_of(1_000_000), 4);
    }

    #[test]
    fn empty_catalog() {
        let r = overview(&Catalog::default(), Timestamp::MIN, Timestamp::MAX).unwrap();
        assert_eq!((r.fill_count, r.run_count, r.log_count, r.pass_count), (0, 0, 0, 0));
        assert_eq!(r.mean_runs_per_fill, 0.0);
        assert!(r.duration_histogram.iter().all(|b| b.count == 0));
        assert_eq!(r.duration_histogram.len(), 5);
        assert!(runs_per_fill(&Catalog::default(), Timestamp::MIN, Timestamp::MAX).unwrap().is_empty());
    }

    #[test]
    fn reversed_range() {
        assert!(overview(&Catalog::default(), Timestamp::MAX, Timestamp::MIN).is_err());
        assert!(runs_per_fill(&Catalog::default(), Timestamp::MAX, Timestamp::MIN).is_err());
    }

    #[test]
    fn csv_shapes() {
        let rows = [FillRunCount { fill_number: 7, run_count: 3 }, FillRunCount { fill_number: 8, run_count: 1 }];
        assert_eq!(runs_per_fill_csv(&rows), "fill_number,run_count\n7,3\n8,1\n");
        let r = overview(&Catalog::default(), Timestamp::MIN, Timestamp::MAX).unwrap();
        let text = overview_csv(&r);
        assert!(text.starts_with("metric,value\nfrom,0001-01-01T00:00:00.000Z\n"));
        assert!(text.contains("duration:<10m,0\n"));
    }
}
