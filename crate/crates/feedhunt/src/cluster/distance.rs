//! Equal-weight multi-feature sample distance for agglomerative clustering.
//!
//! Hash-like features compare by equality (0 or 1), tlsh by its normalized
//! digest distance. Features NULL in either sample drop out of the average
//! and the remaining weights renormalize; two samples sharing no feature are
//! maximally distant.

use crate::features::{ClusterFeature, SampleFeatures};
use crate::tlsh::{normalized_distance, parse_digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// 0 when equal, 1 when not.
    Equality,
    /// Normalized TLSH distance in [0, 1].
    TlshDistance,
}

pub fn kind_of(feature: ClusterFeature) -> FeatureKind {
    match feature {
        ClusterFeature::Tlsh => FeatureKind::TlshDistance,
        _ => FeatureKind::Equality,
    }
}

/// Feature set and merge threshold for [`hac_cluster`](crate::cluster::hac_cluster).
#[derive(Debug, Clone)]
pub struct DistanceSpec {
    pub features: Vec<ClusterFeature>,
    /// Samples closer than this merge (strict `<`), so 0 keeps everything
    /// apart.
    pub threshold: f64,
}

impl DistanceSpec {
    pub fn new(features: Vec<ClusterFeature>, threshold: f64) -> Self {
        Self { features, threshold }
    }
}

/// Weighted average of per-feature distances over the features present in
/// both samples; 1.0 when no feature is shared.
pub fn pairwise_distance(a: &SampleFeatures, b: &SampleFeatures, spec: &DistanceSpec) -> f64 {
    let mut total = 0.0;
    let mut present = 0usize;
    for &feature in &spec.features {
        let (Some(va), Some(vb)) = (feature.value_of(a), feature.value_of(b)) else {
            continue;
        };
        let d = match kind_of(feature) {
            FeatureKind::Equality => {
                if va == vb {
                    0.0
                } else {
                    1.0
                }
            }
            FeatureKind::TlshDistance => match (parse_digest(va), parse_digest(vb)) {
                (Ok(da), Ok(db)) => normalized_distance(&da, &db),
                // an undecodable digest is as good as absent
                _ => continue,
            },
        };
        total += d;
        present += 1;
    }
    if present == 0 {
        1.0
    } else {
        total / present as f64
    }
}
