//! Sample clustering: feature-value grouping, single-linkage agglomerative
//! clustering, and the threshold variant over a vantage-point tree.

mod distance;
mod fvg;
mod hac;
mod hact;
#[cfg(test)]
pub(crate) mod testutil;
mod union_find;
mod vptree;

pub use distance::{pairwise_distance, DistanceSpec, FeatureKind};
pub use fvg::{fvg_cluster, fvg_cluster_file, fvg_rows, FvgFileReport, FvgRow};
pub use hac::{hac_cluster, HacError, DEFAULT_HAC_LIMIT};
pub use hact::{hact_cluster, hact_over_samples, DEFAULT_CDIST};
pub use union_find::UnionFind;
pub use vptree::VpTree;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

/// Why a cluster is a singleton: the sample lacked the feature entirely, the
/// value was shared with no other sample, or the cluster is not a singleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletonReason {
    NullFeature,
    UniqueValue,
    None,
}

impl SingletonReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SingletonReason::NullFeature => "null-feature",
            SingletonReason::UniqueValue => "unique-value",
            SingletonReason::None => "none",
        }
    }
}

impl FromStr for SingletonReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "null-feature" => Ok(SingletonReason::NullFeature),
            "unique-value" => Ok(SingletonReason::UniqueValue),
            "none" => Ok(SingletonReason::None),
            other => Err(format!("unknown singleton reason {other:?}")),
        }
    }
}

impl fmt::Display for SingletonReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Sorted member sample ids.
    pub members: Vec<String>,
    pub reason: SingletonReason,
}

impl Cluster {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// A partition of sample ids into dense integer-id clusters. Construction
/// canonicalizes: members sorted within a cluster, clusters ordered by their
/// smallest member, so equal partitions compare equal regardless of how an
/// algorithm discovered them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    clusters: Vec<Cluster>,
}

impl Clustering {
    /// Builds a canonical clustering. Multi-member groups get reason `None`
    /// whatever the caller passed; panics (debug) if a sample id repeats.
    pub fn from_groups(groups: Vec<(Vec<String>, SingletonReason)>) -> Self {
        let mut clusters: Vec<Cluster> = groups
            .into_iter()
            .filter(|(members, _)| !members.is_empty())
            .map(|(mut members, reason)| {
                members.sort_unstable();
                let reason = if members.len() == 1 { reason } else { SingletonReason::None };
                Cluster { members, reason }
            })
            .collect();
        clusters.sort_unstable_by(|a, b| a.members[0].cmp(&b.members[0]));
        if cfg!(debug_assertions) {
            let mut all: Vec<&str> =
                clusters.iter().flat_map(|c| c.members.iter().map(String::as_str)).collect();
            let n = all.len();
            all.sort_unstable();
            all.dedup();
            debug_assert_eq!(all.len(), n, "clustering is not a partition");
        }
        Self { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn total_samples(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).sum()
    }

    /// sample id -> cluster id.
    pub fn assignment(&self) -> HashMap<&str, usize> {
        let mut map = HashMap::with_capacity(self.total_samples());
        for (id, cluster) in self.clusters.iter().enumerate() {
            for m in &cluster.members {
                map.insert(m.as_str(), id);
            }
        }
        map
    }

    /// The partition as a set of member sets, for equality checks that must
    /// ignore cluster ids.
    pub fn partition(&self) -> Vec<Vec<String>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// Writes `cluster_id<TAB>sha256<TAB>singleton_reason` sorted by cluster
    /// id then member; byte-identical for identical inputs.
    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write_clusters(&mut w, self.clusters.iter().enumerate().map(|(id, c)| (id, c)))?;
        w.flush()
    }

    pub fn read_from(path: &Path) -> io::Result<Self> {
        let r = BufReader::new(File::open(path)?);
        let mut groups: Vec<(Vec<String>, SingletonReason)> = Vec::new();
        let mut last_id: Option<usize> = None;
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {msg}", path.display(), no + 1))
            };
            let mut parts = line.split('\t');
            let (Some(id), Some(sha), Some(reason)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected cluster_id<TAB>sha256<TAB>reason"));
            };
            let id: usize = id.parse().map_err(|_| bad("bad cluster id"))?;
            let reason: SingletonReason = reason.parse().map_err(|e: String| bad(&e))?;
            if last_id != Some(id) {
                if id != groups.len() {
                    return Err(bad("cluster ids must be dense and sorted"));
                }
                groups.push((Vec::new(), reason));
                last_id = Some(id);
            }
            groups.last_mut().expect("just pushed").0.push(sha.to_string());
        }
        Ok(Self::from_groups(groups))
    }
}

/// Shared row writer so streaming producers emit the exact same format.
pub(crate) fn write_clusters<'a, W: Write, I: Iterator<Item = (usize, &'a Cluster)>>(
    w: &mut W,
    clusters: I,
) -> io::Result<()> {
    for (id, cluster) in clusters {
        for m in &cluster.members {
            writeln!(w, "{id}\t{m}\t{}", cluster.reason)?;
        }
    }
    Ok(())
}
