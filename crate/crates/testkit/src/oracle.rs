//! Reference filters. Each check is spelled out field by field with explicit
//! loops; none of them calls into the domain predicates.

use runlog_core::domain::{LogEntry, LogQuery, Run, RunQuery};

pub fn run_matches(run: &Run, q: &RunQuery) -> bool {
    if let Some((lo, hi)) = q.run_number_range {
        if run.run_number < lo || run.run_number > hi {
            return false;
        }
    }
    if let Some((from, to)) = q.time_range {
        let t = run.start_time.as_millis();
        if t < from.as_millis() || t > to.as_millis() {
            return false;
        }
    }
    if let Some(types) = &q.run_types {
        if !types.iter().any(|t| *t == run.run_type) {
            return false;
        }
    }
    if let Some(qs) = &q.qualities {
        if !qs.iter().any(|x| *x == run.quality) {
            return false;
        }
    }
    if let Some(f) = q.fill_number {
        match run.fill_number {
            Some(rf) if rf == f => {}
            _ => return false,
        }
    }
    if let Some(wanted) = &q.tags_all {
        for w in wanted {
            if !run.tags.iter().any(|t| t.as_str() == w.as_str()) {
                return false;
            }
        }
    }
    if let Some(states) = &q.states {
        if !states.iter().any(|s| *s == run.state) {
            return false;
        }
    }
    true
}

fn contains_ci(haystack: &str, needle: &str) -> bool {
    let h: Vec<char> = haystack.chars().flat_map(char::to_lowercase).collect();
    let n: Vec<char> = needle.chars().flat_map(char::to_lowercase).collect();
    if n.is_empty() {
        return true;
    }
    if n.len() > h.len() {
        return false;
    }
    (0..=h.len() - n.len()).any(|i| h[i..i + n.len()] == n[..])
}

pub fn log_matches(log: &LogEntry, q: &LogQuery) -> bool {
    if let Some(tokens) = &q.text {
        let text = format!("{} {}", log.title, log.body);
        for t in tokens {
            if !contains_ci(&text, t) {
                return false;
            }
        }
    }
    if let Some(wanted) = &q.tags_all {
        for w in wanted {
            if !log.tags.iter().any(|t| t == w) {
                return false;
            }
        }
    }
    if let Some(a) = &q.author {
        if log.author.actor_id != *a {
            return false;
        }
    }
    if let Some(assoc) = &q.association {
        if !log.associations.iter().any(|x| x.kind == assoc.kind && x.id == assoc.id) {
            return false;
        }
    }
    if let Some((from, to)) = q.time_range {
        let t = log.created_at.as_millis();
        if t < from.as_millis() || t > to.as_millis() {
            return false;
        }
    }
    true
}

/// Filter, order by `key` descending, and slice `[offset, offset + limit)`.
/// Returns the page and the full match count.
pub fn page<T: Clone>(
    all: &[T],
    matches: impl Fn(&T) -> bool,
    key: impl Fn(&T) -> u64,
    offset: u64,
    limit: u32,
) -> (Vec<T>, u64) {
    let mut hits: Vec<T> = all.iter().filter(|x| matches(x)).cloned().collect();
    hits.sort_by_key(|x| std::cmp::Reverse(key(x)));
    let total = hits.len() as u64;
    let start = (offset as usize).min(hits.len());
    let end = (start + limit as usize).min(hits.len());
    (hits[start..end].to_vec(), total)
}
