//! Human-readable output for `--output table`.

use std::fmt::Write;

use runlog_core::domain::Run;
use runlog_core::simulator::ReplayReport;
use runlog_core::store::{AuditReport, EntityCounts, IntegrityReport, Page};
use serde_json::Value;

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn runs(page: &Page<Run>) -> String {
    let rows: Vec<Vec<String>> = page
        .items
        .iter()
        .map(|r| {
            vec![
                r.run_number.to_string(),
                r.run_type.as_str().to_string(),
                r.state.as_str().to_string(),
                r.quality.as_str().to_string(),
                r.fill_number.map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
                r.start_time.to_string(),
                r.end_time.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
                r.tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(","),
            ]
        })
        .collect();
    let mut out = table(&["RUN", "TYPE", "STATE", "QUALITY", "FILL", "START", "END", "TAGS"], &rows);
    let shown = page.items.len() as u64;
    let first = if shown == 0 { 0 } else { page.offset + 1 };
    let _ = writeln!(out, "{first}-{} of {}", page.offset + shown, page.total);
    out
}

pub fn log_created(entry: &Value, attachments: &[Value]) -> String {
    let mut out = format!("created log {}: {}\n", entry["log_id"], entry["title"].as_str().unwrap_or_default());
    for a in attachments {
        let _ = writeln!(
            out,
            "attached {} ({} bytes, {})",
            a["filename"].as_str().unwrap_or_default(),
            a["size_bytes"],
            a["digest"].as_str().unwrap_or_default()
        );
    }
    out
}

fn count_rows(counts: &EntityCounts) -> Vec<Vec<String>> {
    [
        ("fills", counts.fills),
        ("runs", counts.runs),
        ("passes", counts.passes),
        ("logs", counts.logs),
        ("templates", counts.templates),
        ("attachments", counts.attachments),
        ("audit records", counts.audit_records),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), v.to_string()])
    .collect()
}

pub fn counts(heading: &str, counts: &EntityCounts) -> String {
    format!("{heading}\n{}", table(&["ENTITY", "COUNT"], &count_rows(counts)))
}

pub fn replay(generated: &EntityCounts, report: &ReplayReport) -> String {
    let mut out = format!(
        "{} requests in {:.1}s, {} rejected\n",
        report.requests,
        report.elapsed.as_secs_f64(),
        report.failures.len()
    );
    out.push_str(&table(&["ENTITY", "GENERATED"], &count_rows(generated)[..4]));
    for f in report.failures.iter().take(10) {
        let _ = writeln!(out, "rejected: {}: {}", f.request, f.error);
    }
    if report.failures.len() > 10 {
        let _ = writeln!(out, "... and {} more", report.failures.len() - 10);
    }
    out
}

pub fn verification(audit: &AuditReport, integrity: &IntegrityReport) -> String {
    let mut out = format!("{} audit records, sequence contiguous: {}\n", audit.count, audit.contiguous);
    if let Some(gap) = audit.first_gap {
        let _ = writeln!(out, "first gap at sequence {gap}");
    }
    let _ = writeln!(
        out,
        "payload digests checked: {}, mismatched: {}",
        audit.digests_checked,
        audit.digest_mismatches.len()
    );
    for seq in &audit.digest_mismatches {
        let _ = writeln!(out, "digest mismatch at sequence {seq}");
    }
    let _ = writeln!(out, "integrity violations: {}", integrity.violations.len());
    for v in &integrity.violations {
        let _ = writeln!(out, "  {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align_to_the_widest_cell() {
        let t = table(&["A", "BB"], &[vec!["long".into(), "x".into()], vec!["s".into(), "yy".into()]]);
        assert_eq!(t, "A     BB\nlong  x\ns     yy\n");
    }

    #[test]
    fn empty_page_renders_header_and_zero_range() {
        let page: Page<Run> = Page { items: vec![], total: 0, offset: 0, limit: 100 };
        let out = runs(&page);
        assert!(out.starts_with("RUN  TYPE"));
        assert!(out.ends_with("0-0 of 0\n"));
    }
}
