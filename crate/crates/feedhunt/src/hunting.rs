//! Threat hunting over clusterings and per-sample report histories:
//! detection-ratio cluster verdicts, flagging zero-detection members of
//! mostly-detected clusters, and spotting samples that started fully
//! undetected and flipped malicious later.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cluster::Clustering;
use crate::time::TimeWindow;

/// Detection-count thresholds behind the r1/r4 ratios.
pub const DEFAULT_LOW_THRESHOLD: u32 = 1;
pub const DEFAULT_HIGH_THRESHOLD: u32 = 4;
/// Classification flips within this many seconds of first submission are
/// scanner warm-up noise, not late detections.
pub const DEFAULT_FUD_GRACE_SECS: i64 = 300;
pub const DEFAULT_FUD_THRESHOLD: u32 = 4;

#[derive(Debug, Error)]
pub enum HuntError {
    #[error("{0} clustered samples have no score (first: {1})")]
    MissingScore(usize, String),
    #[error("history for {0} is not ordered by scan time")]
    UnorderedHistory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictClass {
    FullyMalicious,
    FullyBenign,
    Mixed,
}

impl VerdictClass {
    fn of(ratio: f64) -> Self {
        if ratio == 1.0 {
            VerdictClass::FullyMalicious
        } else if ratio == 0.0 {
            VerdictClass::FullyBenign
        } else {
            VerdictClass::Mixed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictClass::FullyMalicious => "fully-malicious",
            VerdictClass::FullyBenign => "fully-benign",
            VerdictClass::Mixed => "mixed",
        }
    }
}

impl fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which detection ratio a hunt filters on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    R1,
    R4,
}

impl FromStr for RatioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r1" => Ok(RatioKind::R1),
            "r4" => Ok(RatioKind::R4),
            other => Err(format!("unknown ratio kind {other:?} (expected r1 or r4)")),
        }
    }
}

/// Per-cluster detection ratios and classifications.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterVerdict {
    pub cluster_id: usize,
    pub size: usize,
    /// Fraction of members at or above the low threshold (default >= 1).
    pub r1: f64,
    /// Fraction at or above the high threshold (default >= 4); never above r1.
    pub r4: f64,
    pub class_r1: VerdictClass,
    pub class_r4: VerdictClass,
    pub malicious_majority_r1: bool,
    pub malicious_majority_r4: bool,
    /// Zero-detection members, sorted; empty for fully benign clusters.
    pub flagged: Vec<String>,
}

impl ClusterVerdict {
    pub fn ratio(&self, kind: RatioKind) -> f64 {
        match kind {
            RatioKind::R1 => self.r1,
            RatioKind::R4 => self.r4,
        }
    }
}

/// Computes verdicts for every non-singleton cluster (singletons opt-in).
/// Every clustered sample must have a score.
pub fn classify_clusters(
    clustering: &Clustering,
    scores: &HashMap<String, u32>,
    low_threshold: u32,
    high_threshold: u32,
    include_singletons: bool,
) -> Result<Vec<ClusterVerdict>, HuntError> {
    let mut missing = 0usize;
    let mut first_missing: Option<&str> = None;
    for cluster in clustering.clusters() {
        for m in &cluster.members {
            if !scores.contains_key(m.as_str()) {
                missing += 1;
                first_missing.get_or_insert(m.as_str());
            }
        }
    }
    if let Some(first) = first_missing {
        return Err(HuntError::MissingScore(missing, first.to_string()));
    }

    let mut verdicts = Vec::new();
    for (cluster_id, cluster) in clustering.clusters().iter().enumerate() {
        if cluster.is_singleton() && !include_singletons {
            continue;
        }
        let size = cluster.members.len();
        let mut at_low = 0usize;
        let mut at_high = 0usize;
        let mut zeroes: Vec<String> = Vec::new();
        for m in &cluster.members {
            let score = scores[m.as_str()];
            if score >= low_threshold {
                at_low += 1;
            }
            if score >= high_threshold {
                at_high += 1;
            }
            if score == 0 {
                zeroes.push(m.clone());
            }
        }
        let r1 = at_low as f64 / size as f64;
        let r4 = at_high as f64 / size as f64;
        verdicts.push(ClusterVerdict {
            cluster_id,
            size,
            r1,
            r4,
            class_r1: VerdictClass::of(r1),
            class_r4: VerdictClass::of(r4),
            malicious_majority_r1: r1 >= 0.5,
            malicious_majority_r4: r4 >= 0.5,
            // fully benign clusters flag nothing
            flagged: if r1 > 0.0 { zeroes } else { Vec::new() },
        });
    }
    Ok(verdicts)
}

/// A zero-detection sample flagged through its cluster's verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedSample {
    pub sha256: String,
    pub cluster_id: usize,
    pub ratio: f64,
}

/// Union of flagged members over clusters whose chosen ratio is at least
/// `min_ratio`; deduplicated, ordered by (cluster_id, sha256).
pub fn flag_undetected(
    verdicts: &[ClusterVerdict],
    min_ratio: f64,
    kind: RatioKind,
) -> Vec<FlaggedSample> {
    let mut out: Vec<FlaggedSample> = Vec::new();
    for v in verdicts {
        let ratio = v.ratio(kind);
        if ratio < min_ratio {
            continue;
        }
        for sha in &v.flagged {
            out.push(FlaggedSample { sha256: sha.clone(), cluster_id: v.cluster_id, ratio });
        }
    }
    out.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id).then_with(|| a.sha256.cmp(&b.sha256)));
    out.dedup_by(|a, b| a.sha256 == b.sha256);
    out
}

/// Ordered scan history of one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleHistory {
    pub sha256: String,
    pub fseen_date: i64,
    /// (scan_date, vt_score), ascending by scan_date.
    pub scans: Vec<(i64, u32)>,
}

/// A sample that was fully undetected at first sight and later crossed the
/// detection threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FudRecord {
    pub sha256: String,
    pub fseen_date: i64,
    /// Earliest observed zero-detection scan; first submission time when the
    /// zero-detection first scan itself was not collected.
    pub first_zero_scan: i64,
    /// First scan at or above the threshold.
    pub flip_scan: i64,
    /// flip_scan - fseen_date; always above the grace period.
    pub flip_delay: i64,
}

/// Detects originally-fully-undetected samples. A sample qualifies when
/// (1) it was first submitted inside the window, (2) its last report has at
/// least `threshold` detections, and (3) its first report had zero
/// detections, or its first submission predates the earliest collected scan
/// and does not fall into a collection gap (a stream that only carried
/// detected reports cannot have seen the zero-detection scan). Flips within
/// `grace` seconds of first submission are dropped. Output sorted by sha256.
pub fn detect_originally_fud(
    histories: &[SampleHistory],
    window: TimeWindow,
    gaps: &[TimeWindow],
    threshold: u32,
    grace: i64,
) -> Result<Vec<FudRecord>, HuntError> {
    let mut out = Vec::new();
    for h in histories {
        if h.scans.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err(HuntError::UnorderedHistory(h.sha256.clone()));
        }
        let (Some(&first), Some(&last)) = (h.scans.first(), h.scans.last()) else {
            continue;
        };
        if !window.contains(h.fseen_date) {
            continue;
        }
        if last.1 < threshold {
            continue;
        }
        let zero_first = first.1 == 0;
        let predates_collection =
            !gaps.iter().any(|g| g.contains(h.fseen_date)) && h.fseen_date < first.0;
        if !(zero_first || predates_collection) {
            continue;
        }
        let flip_scan = h
            .scans
            .iter()
            .find(|(_, score)| *score >= threshold)
            .map(|(t, _)| *t)
            .expect("last scan is at or above threshold");
        let flip_delay = flip_scan - h.fseen_date;
        if flip_delay <= grace {
            continue;
        }
        let first_zero_scan = h
            .scans
            .iter()
            .find(|(_, score)| *score == 0)
            .map(|(t, _)| *t)
            .unwrap_or(h.fseen_date);
        out.push(FudRecord {
            sha256: h.sha256.clone(),
            fseen_date: h.fseen_date,
            first_zero_scan,
            flip_scan,
            flip_delay,
        });
    }
    out.sort_by(|a, b| a.sha256.cmp(&b.sha256));
    Ok(out)
}
