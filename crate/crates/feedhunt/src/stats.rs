//! Feed characterization: daily volumes, detection distributions, filetype
//! and family prevalence, and the cross-dataset observation delay.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::evaluation::size_summary;
use crate::time::{day_of, TimeWindow};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("the two datasets share no samples")]
    EmptyIntersection,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DayCounts {
    pub reports: u64,
    pub samples: u64,
    pub new_samples: u64,
    /// Day overlaps a declared collection gap; excluded from summaries.
    pub in_gap: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub max: u64,
}

fn summarize(values: impl Iterator<Item = u64>) -> SeriesSummary {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    let (mean, median, std, max) = size_summary(&v);
    SeriesSummary { mean, median, std, max }
}

/// Per-UTC-day report/sample/new-sample counts plus gap-excluded summaries.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DailyStats {
    /// day index (days since epoch) -> counts.
    pub days: BTreeMap<i64, DayCounts>,
    pub reports: SeriesSummary,
    pub samples: SeriesSummary,
    pub new_samples: SeriesSummary,
}

/// Counts daily volumes over `(sha256, scan_date, fseen_date)` report rows.
/// Rows scanned outside the window are skipped. A sample counts as new only
/// on its first-submission day, and only if it was also scanned that day, so
/// per-day `new_samples <= samples <= reports` always holds.
pub fn daily_volume<I>(rows: I, window: TimeWindow, gaps: &[TimeWindow]) -> DailyStats
where
    I: IntoIterator<Item = (String, i64, i64)>,
{
    struct DayAcc {
        reports: u64,
        samples: HashSet<String>,
        new_samples: HashSet<String>,
    }
    let mut acc: BTreeMap<i64, DayAcc> = BTreeMap::new();
    for (sha256, scan_date, fseen_date) in rows {
        if !window.contains(scan_date) {
            continue;
        }
        let day = day_of(scan_date);
        let entry = acc.entry(day).or_insert_with(|| DayAcc {
            reports: 0,
            samples: HashSet::new(),
            new_samples: HashSet::new(),
        });
        entry.reports += 1;
        if day_of(fseen_date) == day {
            entry.new_samples.insert(sha256.clone());
        }
        entry.samples.insert(sha256);
    }

    let mut stats = DailyStats::default();
    for (day, a) in acc {
        let in_gap = gaps.iter().any(|g| g.overlaps_day(day));
        stats.days.insert(
            day,
            DayCounts {
                reports: a.reports,
                samples: a.samples.len() as u64,
                new_samples: a.new_samples.len() as u64,
                in_gap,
            },
        );
    }
    let kept = || stats.days.values().filter(|d| !d.in_gap);
    stats.reports = summarize(kept().map(|d| d.reports));
    stats.samples = summarize(kept().map(|d| d.samples));
    stats.new_samples = summarize(kept().map(|d| d.new_samples));
    stats
}

/// Detection-count histogram with its reverse ECDF.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DetectionHistogram {
    pub counts: BTreeMap<u32, u64>,
    pub total: u64,
}

impl DetectionHistogram {
    /// Fraction of rows with at least `s` detections; 1 at s = 0,
    /// non-increasing in s.
    pub fn recdf(&self, s: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let at_least: u64 = self.counts.range(s..).map(|(_, c)| c).sum();
        at_least as f64 / self.total as f64
    }

    /// (score, reverse-ECDF) points for every score from 0 through the
    /// maximum observed.
    pub fn recdf_points(&self) -> Vec<(u32, f64)> {
        let max = self.counts.keys().next_back().copied().unwrap_or(0);
        if self.total == 0 {
            return Vec::new();
        }
        (0..=max).map(|s| (s, self.recdf(s))).collect()
    }
}

pub fn detection_distribution<I: IntoIterator<Item = u32>>(scores: I) -> DetectionHistogram {
    let mut h = DetectionHistogram::default();
    for s in scores {
        *h.counts.entry(s).or_default() += 1;
        h.total += 1;
    }
    h
}

/// Counts by canonical filetype with NULL as its own bucket, ranked by
/// descending count then name. Percentages over the total.
pub fn filetype_distribution<'a, I>(filetypes: I) -> Vec<(String, u64, f64)>
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for ft in filetypes {
        *counts.entry(ft.unwrap_or("NULL").to_string()).or_default() += 1;
        total += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .map(|(name, count)| (name, count, 100.0 * count as f64 / total as f64))
        .collect()
}

/// Family prevalence: bucket counts at the >=1 / >=10 / >=100 / >=1000
/// member thresholds, plus the top families per filetype when filetypes are
/// supplied.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FamilyPrevalence {
    pub labeled_samples: u64,
    pub families: u64,
    /// Families with at least 1, 10, 100, 1000 members.
    pub buckets: [u64; 4],
    pub top_per_filetype: BTreeMap<String, Vec<(String, u64)>>,
}

pub const PREVALENCE_THRESHOLDS: [u64; 4] = [1, 10, 100, 1000];

pub fn family_prevalence<I>(
    labels: I,
    filetypes: Option<&HashMap<String, String>>,
    top_k: usize,
) -> FamilyPrevalence
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut family_counts: HashMap<String, u64> = HashMap::new();
    let mut per_filetype: HashMap<String, HashMap<String, u64>> = HashMap::new();
    let mut labeled = 0u64;
    for (sha256, family) in labels {
        labeled += 1;
        *family_counts.entry(family.clone()).or_default() += 1;
        if let Some(fts) = filetypes {
            let ft = fts.get(&sha256).cloned().unwrap_or_else(|| "NULL".to_string());
            *per_filetype.entry(ft).or_default().entry(family).or_default() += 1;
        }
    }
    let mut buckets = [0u64; 4];
    for &count in family_counts.values() {
        for (i, &t) in PREVALENCE_THRESHOLDS.iter().enumerate() {
            if count >= t {
                buckets[i] += 1;
            }
        }
    }
    let mut top_per_filetype = BTreeMap::new();
    for (ft, fams) in per_filetype {
        let mut ranked: Vec<(String, u64)> = fams.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(top_k);
        top_per_filetype.insert(ft, ranked);
    }
    FamilyPrevalence {
        labeled_samples: labeled,
        families: family_counts.len() as u64,
        buckets,
        top_per_filetype,
    }
}

/// Observation-delay comparison between two first-seen maps.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TelemetryDelay {
    /// (sha256, delay seconds), delay = vt first seen minus other first
    /// seen; positive means the other dataset saw the sample first. Sorted
    /// by sha256.
    pub delays: Vec<(String, i64)>,
    pub median: f64,
    pub mean: f64,
    /// Fraction with positive delay (other dataset first).
    pub frac_other_first: f64,
    /// Fraction with negative delay (this feed first).
    pub frac_feed_first: f64,
    /// Fraction with |delay| above 90 days.
    pub frac_long: f64,
}

pub const LONG_DELAY_SECS: i64 = 90 * 86_400;

pub fn telemetry_delay(
    vt_fseen: &HashMap<String, i64>,
    other_fseen: &HashMap<String, i64>,
) -> Result<TelemetryDelay, StatsError> {
    let mut delays: Vec<(String, i64)> = vt_fseen
        .iter()
        .filter_map(|(sha, &vt)| other_fseen.get(sha).map(|&o| (sha.clone(), vt - o)))
        .collect();
    if delays.is_empty() {
        return Err(StatsError::EmptyIntersection);
    }
    delays.sort();
    let n = delays.len() as f64;
    let mut sorted: Vec<i64> = delays.iter().map(|(_, d)| *d).collect();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };
    let mean = sorted.iter().map(|&d| d as f64).sum::<f64>() / n;
    let positive = sorted.iter().filter(|&&d| d > 0).count() as f64;
    let negative = sorted.iter().filter(|&&d| d < 0).count() as f64;
    let long = sorted.iter().filter(|&&d| d.abs() > LONG_DELAY_SECS).count() as f64;
    Ok(TelemetryDelay {
        delays,
        median,
        mean,
        frac_other_first: positive / n,
        frac_feed_first: negative / n,
        frac_long: long / n,
    })
}
