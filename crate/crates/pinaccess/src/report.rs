//! Per-cell DRC summary rendering, width histograms, and run metrics.

use crate::drc::DrcViolation;
use crate::techlib::LibraryProfile;
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("library is empty")]
    EmptyLibrary,
    #[error("bucket size must be positive")]
    BadBucket,
}

/// Per-testcell report row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestcellResult {
    pub id: String,
    pub drc_count: usize,
    /// Attributed masters, sorted, deduplicated.
    pub masters: Vec<String>,
    /// Violation type display names, sorted, deduplicated.
    pub types: Vec<String>,
}

impl TestcellResult {
    pub fn from_violations(id: &str, violations: &[DrcViolation]) -> Self {
        let mut masters: Vec<String> = violations.iter().flat_map(|v| v.masters.iter().cloned()).collect();
        masters.sort();
        masters.dedup();
        let mut types: Vec<String> = violations.iter().map(|v| v.rule.display_name().to_string()).collect();
        types.sort();
        types.dedup();
        TestcellResult { id: id.to_string(), drc_count: violations.len(), masters, types }
    }
}

/// Wall-clock and artifact-size metrics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub wall_time_seconds: f64,
    pub output_bytes: u64,
    pub cells_with_violations: usize,
}

/// Everything the reporters need about a finished run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub testcells: Vec<TestcellResult>,
    /// Aggregated attribution counts per library cell, library order.
    pub per_cell: Vec<(String, usize)>,
    pub metrics: Metrics,
}

/// Aggregate per-testcell results into the run summary. Per-cell counts
/// sum attribution pairs: a violation blaming two masters counts once
/// for each.
pub fn collect_metrics(
    results: &[TestcellResult],
    attributions: &[(String, usize)],
    profile: &LibraryProfile,
    wall_time_seconds: f64,
    output_bytes: u64,
) -> RunSummary {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (master, n) in attributions {
        *counts.entry(master.as_str()).or_default() += n;
    }
    let per_cell: Vec<(String, usize)> = profile
        .cells
        .iter()
        .map(|c| (c.name.clone(), counts.get(c.name.as_str()).copied().unwrap_or(0)))
        .collect();
    let cells_with_violations = per_cell.iter().filter(|(_, n)| *n > 0).count();
    RunSummary {
        testcells: results.to_vec(),
        per_cell,
        metrics: Metrics { wall_time_seconds, output_bytes, cells_with_violations },
    }
}

/// Fixed-width textual summary: clean testcells first, then the
/// offenders with their counts, blamed masters, and brace-wrapped type
/// sets.
pub fn render_summary(results: &[TestcellResult]) -> String {
    let mut clean: Vec<&TestcellResult> = results.iter().filter(|r| r.drc_count == 0).collect();
    let mut dirty: Vec<&TestcellResult> = results.iter().filter(|r| r.drc_count > 0).collect();
    clean.sort_by(|a, b| a.id.cmp(&b.id));
    dirty.sort_by(|a, b| a.id.cmp(&b.id));

    let mut out = String::new();
    let _ = writeln!(out, "##### {} cells without DRC errors #####", clean.len());
    out.push_str("-----\n");
    let _ = writeln!(out, "{:<20}{:<11}{:<37}DRC Types", "Cell", "DRC count", "Master Cells with DRC");
    out.push_str("-----\n");
    for r in &clean {
        let _ = writeln!(out, "{:<20}{}", r.id, 0);
    }
    let _ = writeln!(out, "##### {} cells with DRC errors #####", dirty.len());
    for r in &dirty {
        let types = format!("{{{}}}", r.types.join(", "));
        let line = format!("{:<20}{:<11}{:<37}{}", r.id, r.drc_count, r.masters.join(","), types);
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

/// Histogram of cell widths normalized by the library minimum. Bucket
/// `k` covers normalized widths in ((k-1)*bucket, k*bucket]; fractions
/// are exact and sum to one.
pub fn width_histogram(profile: &LibraryProfile, bucket: i64) -> Result<Vec<(i64, Ratio<i64>)>, ReportError> {
    if profile.is_empty() {
        return Err(ReportError::EmptyLibrary);
    }
    if bucket < 1 {
        return Err(ReportError::BadBucket);
    }
    let unit = profile.min_width * bucket;
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    for c in &profile.cells {
        let k = (c.width + unit - 1) / unit;
        *counts.entry(k).or_default() += 1;
    }
    let total = profile.cells.len() as i64;
    let max_bucket = counts.keys().max().copied().unwrap_or(1);
    Ok((1..=max_bucket)
        .map(|k| (k, Ratio::new(counts.get(&k).copied().unwrap_or(0), total)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::techlib::profile_library;

    #[test]
    fn banners_count_testcells() {
        let results = vec![
            TestcellResult { id: "a".into(), drc_count: 0, masters: vec![], types: vec![] },
            TestcellResult { id: "b".into(), drc_count: 0, masters: vec![], types: vec![] },
            TestcellResult { id: "c".into(), drc_count: 0, masters: vec![], types: vec![] },
            TestcellResult { id: "d".into(), drc_count: 0, masters: vec![], types: vec![] },
            TestcellResult {
                id: "e".into(),
                drc_count: 1,
                masters: vec!["M".into()],
                types: vec!["Same net via-cut spacing".into()],
            },
        ];
        let text = render_summary(&results);
        assert!(text.contains("##### 4 cells without DRC errors #####"));
        assert!(text.contains("##### 1 cells with DRC errors #####"));
        assert!(text.contains("{Same net via-cut spacing}"));
    }

    #[test]
    fn empty_run_renders_zero_banners() {
        let text = render_summary(&[]);
        assert!(text.contains("##### 0 cells without DRC errors #####"));
        assert!(text.contains("##### 0 cells with DRC errors #####"));
    }

    #[test]
    fn equal_widths_fill_one_bucket() {
        let (rules, _) = fixtures::uniform_library(1);
        let cells = vec![
            fixtures::simple_cell("A", 6, &rules),
            fixtures::simple_cell("B", 6, &rules),
        ];
        let profile = profile_library(&rules, &cells).unwrap();
        let hist = width_histogram(&profile, 1).unwrap();
        assert_eq!(hist, vec![(1, Ratio::from_integer(1))]);
    }

    #[test]
    fn fractions_sum_to_one_exactly() {
        let (rules, cells) = fixtures::library1_like();
        let profile = profile_library(&rules, &cells).unwrap();
        let hist = width_histogram(&profile, 1).unwrap();
        let total: Ratio<i64> = hist.iter().map(|(_, f)| *f).sum();
        assert_eq!(total, Ratio::from_integer(1));
        // independent recount
        for (k, f) in &hist {
            let unit = profile.min_width;
            let count = profile
                .cells
                .iter()
                .filter(|c| c.width > (k - 1) * unit && c.width <= k * unit)
                .count() as i64;
            assert_eq!(*f, Ratio::new(count, profile.cells.len() as i64));
        }
    }

    #[test]
    fn per_cell_counts_sum_to_total_attributions() {
        let (rules, cells) = fixtures::uniform_library(3);
        let profile = profile_library(&rules, &cells).unwrap();
        let attributions = vec![
            ("C00".to_string(), 2usize),
            ("C01".to_string(), 1),
            ("C00".to_string(), 3),
        ];
        let summary = collect_metrics(&[], &attributions, &profile, 0.0, 0);
        let total: usize = summary.per_cell.iter().map(|(_, n)| n).sum();
        assert_eq!(total, 6);
        assert_eq!(summary.metrics.cells_with_violations, 2);
    }

    #[test]
    fn distinct_results_render_distinct_reports() {
        let a = vec![TestcellResult { id: "x".into(), drc_count: 0, masters: vec![], types: vec![] }];
        let b = vec![TestcellResult {
            id: "x".into(),
            drc_count: 2,
            masters: vec!["M".into()],
            types: vec!["Open".into()],
        }];
        assert_ne!(render_summary(&a), render_summary(&b));
    }

    #[test]
    fn most_cells_within_ten_times_minimum() {
        let (rules, cells) = fixtures::library1_like();
        let profile = profile_library(&rules, &cells).unwrap();
        let hist = width_histogram(&profile, 1).unwrap();
        let cumulative: Ratio<i64> = hist.iter().filter(|(k, _)| *k <= 10).map(|(_, f)| *f).sum();
        assert!(cumulative >= Ratio::new(4, 5), "cumulative at 10x = {cumulative}");
    }
}
