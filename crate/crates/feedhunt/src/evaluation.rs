//! Clustering accuracy against ground-truth family labels, plus cluster
//! size summaries.
//!
//! Precision rewards pure clusters: over the n samples present in both the
//! clustering and the truth, it sums each cluster's largest single-family
//! member count. Recall rewards whole families: it sums each family's
//! largest single-cluster member count. Both divide by n.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::cluster::{Clustering, SingletonReason};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("clustering and ground truth share no samples")]
    EmptyIntersection,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// sha256 -> family.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    map: HashMap<String, String>,
}

impl GroundTruth {
    pub fn new(map: HashMap<String, String>) -> Self {
        Self { map }
    }

    /// Two-column text `sha256<TAB>family`; `#` comments skipped; empty
    /// family names rejected.
    pub fn read_from(path: &Path) -> Result<Self, EvalError> {
        let mut map = HashMap::new();
        for (no, line) in fs::read_to_string(path)?.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| {
                EvalError::Io(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: {msg}", path.display(), no + 1),
                ))
            };
            let (sha, family) =
                line.split_once('\t').ok_or_else(|| bad("expected sha256<TAB>family"))?;
            if family.trim().is_empty() {
                return Err(bad("empty family"));
            }
            map.insert(sha.trim().to_string(), family.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn family_of(&self, sha256: &str) -> Option<&str> {
        self.map.get(sha256).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// Clusters containing at least one scored sample.
    pub clusters: usize,
    /// Scored samples (present in both inputs).
    pub samples: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Scores a clustering against ground truth. Samples absent from the truth
/// are dropped; metrics and the cluster count cover scored samples only.
pub fn precision_recall_f1(
    clustering: &Clustering,
    truth: &GroundTruth,
) -> Result<AccuracyReport, EvalError> {
    let mut n = 0usize;
    let mut scored_clusters = 0usize;
    let mut precision_hits = 0usize;
    // family -> cluster id -> members
    let mut family_cluster: HashMap<&str, HashMap<usize, usize>> = HashMap::new();

    for (cluster_id, cluster) in clustering.clusters().iter().enumerate() {
        let mut family_counts: HashMap<&str, usize> = HashMap::new();
        for member in &cluster.members {
            if let Some(family) = truth.family_of(member) {
                *family_counts.entry(family).or_default() += 1;
            }
        }
        if family_counts.is_empty() {
            continue;
        }
        scored_clusters += 1;
        let cluster_scored: usize = family_counts.values().sum();
        n += cluster_scored;
        precision_hits += family_counts.values().copied().max().unwrap_or(0);
        for (family, count) in family_counts {
            *family_cluster.entry(family).or_default().entry(cluster_id).or_default() += count;
        }
    }

    if n == 0 {
        return Err(EvalError::EmptyIntersection);
    }

    let recall_hits: usize = family_cluster
        .values()
        .map(|clusters| clusters.values().copied().max().unwrap_or(0))
        .sum();

    let precision = precision_hits as f64 / n as f64;
    let recall = recall_hits as f64 / n as f64;
    Ok(AccuracyReport {
        clusters: scored_clusters,
        samples: n,
        precision,
        recall,
        f1: f1_score(precision, recall),
    })
}

/// Size summary in the all vs non-NULL split (non-NULL excludes singletons
/// that exist only because the sample lacked the feature).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterSizeStats {
    pub clusters_all: u64,
    pub clusters_non_null: u64,
    pub singletons_all: u64,
    pub singletons_non_null: u64,
    pub max: u64,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation of non-NULL cluster sizes.
    pub std: f64,
}

/// Mean / median / population-std / max over a sorted size list.
pub fn size_summary(sorted_sizes: &[u64]) -> (f64, f64, f64, u64) {
    if sorted_sizes.is_empty() {
        return (0.0, 0.0, 0.0, 0);
    }
    let n = sorted_sizes.len();
    let sum: u64 = sorted_sizes.iter().sum();
    let mean = sum as f64 / n as f64;
    let median = if n % 2 == 1 {
        sorted_sizes[n / 2] as f64
    } else {
        (sorted_sizes[n / 2 - 1] + sorted_sizes[n / 2]) as f64 / 2.0
    };
    let var =
        sorted_sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n as f64;
    (mean, median, var.sqrt(), *sorted_sizes.last().expect("non-empty"))
}

pub fn cluster_size_stats(clustering: &Clustering) -> ClusterSizeStats {
    let mut stats = ClusterSizeStats::default();
    let mut non_null_sizes: Vec<u64> = Vec::new();
    for cluster in clustering.clusters() {
        let size = cluster.members.len() as u64;
        stats.clusters_all += 1;
        if size == 1 {
            stats.singletons_all += 1;
        }
        if cluster.reason != SingletonReason::NullFeature {
            stats.clusters_non_null += 1;
            if size == 1 {
                stats.singletons_non_null += 1;
            }
            non_null_sizes.push(size);
        }
    }
    non_null_sizes.sort_unstable();
    let (mean, median, std, max) = size_summary(&non_null_sizes);
    stats.mean = mean;
    stats.median = median;
    stats.std = std;
    stats.max = max;
    stats
}
