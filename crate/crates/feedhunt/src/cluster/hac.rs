//! Single-linkage agglomerative clustering cut at a distance threshold.
//!
//! Cutting a single-linkage dendrogram at `t` yields exactly the connected
//! components of the graph whose edges are pairs closer than `t`, so the
//! implementation unions every pair below the threshold. The pair loop is
//! quadratic; a guard refuses inputs past a configurable size and points
//! users at the scalable engines.

use thiserror::Error;

use crate::cluster::distance::{kind_of, DistanceSpec, FeatureKind};
use crate::cluster::{Clustering, SingletonReason, UnionFind};
use crate::features::SampleFeatures;
use crate::tlsh::{normalized_distance, parse_digest, TlshDigest};

/// Above this many samples the quadratic pass is refused by default.
pub const DEFAULT_HAC_LIMIT: usize = 50_000;

#[derive(Debug, Error)]
pub enum HacError {
    #[error(
        "{count} samples exceed the pairwise limit of {limit}; \
         use feature-value grouping or the tlsh threshold clustering instead"
    )]
    TooLarge { count: usize, limit: usize },
    #[error("distance spec has no features")]
    EmptySpec,
}

/// Per-sample feature values pre-resolved so the quadratic loop does no
/// string parsing.
enum Prepared<'a> {
    Absent,
    Text(&'a str),
    Digest(TlshDigest),
}

/// Connected components of the `pairwise_distance < threshold` graph.
/// Samples with every spec feature NULL become null-feature singletons.
pub fn hac_cluster(
    samples: &[SampleFeatures],
    spec: &DistanceSpec,
    limit: usize,
) -> Result<Clustering, HacError> {
    if spec.features.is_empty() {
        return Err(HacError::EmptySpec);
    }
    if samples.len() > limit {
        return Err(HacError::TooLarge { count: samples.len(), limit });
    }

    let prepared: Vec<Vec<Prepared>> = samples
        .iter()
        .map(|s| {
            spec.features
                .iter()
                .map(|&f| match f.value_of(s) {
                    None => Prepared::Absent,
                    Some(v) => match kind_of(f) {
                        FeatureKind::Equality => Prepared::Text(v),
                        FeatureKind::TlshDistance => match parse_digest(v) {
                            Ok(d) => Prepared::Digest(d),
                            Err(_) => Prepared::Absent,
                        },
                    },
                })
                .collect()
        })
        .collect();

    let mut null_groups: Vec<(Vec<String>, SingletonReason)> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for (i, features) in prepared.iter().enumerate() {
        if features.iter().all(|p| matches!(p, Prepared::Absent)) {
            null_groups.push((vec![samples[i].sha256.clone()], SingletonReason::NullFeature));
        } else {
            active.push(i);
        }
    }

    let dist = |a: &[Prepared], b: &[Prepared]| -> f64 {
        let mut total = 0.0;
        let mut present = 0usize;
        for (pa, pb) in a.iter().zip(b) {
            match (pa, pb) {
                (Prepared::Text(ta), Prepared::Text(tb)) => {
                    total += if ta == tb { 0.0 } else { 1.0 };
                    present += 1;
                }
                (Prepared::Digest(da), Prepared::Digest(db)) => {
                    total += normalized_distance(da, db);
                    present += 1;
                }
                _ => {}
            }
        }
        if present == 0 {
            1.0
        } else {
            total / present as f64
        }
    };

    let mut uf = UnionFind::new(active.len());
    for i in 0..active.len() {
        for j in (i + 1)..active.len() {
            if dist(&prepared[active[i]], &prepared[active[j]]) < spec.threshold {
                uf.union(i, j);
            }
        }
    }

    let mut groups: Vec<(Vec<String>, SingletonReason)> = uf
        .groups()
        .into_iter()
        .map(|g| {
            let members: Vec<String> =
                g.into_iter().map(|i| samples[active[i]].sha256.clone()).collect();
            let reason = if members.len() == 1 {
                SingletonReason::UniqueValue
            } else {
                SingletonReason::None
            };
            (members, reason)
        })
        .collect();
    groups.append(&mut null_groups);
    Ok(Clustering::from_groups(groups))
}
