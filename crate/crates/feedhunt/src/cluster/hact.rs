//! Threshold clustering over TLSH digests via the vantage-point tree.
//!
//! Union-find over every (i, j) pair the radius search discovers at
//! distance <= cdist. Exact search yields the transitive closure of the
//! threshold relation (the optimal variant); approximate search may miss
//! edges, so each of its clusters sits inside one exact cluster.

use rayon::prelude::*;

use crate::cluster::{Clustering, SingletonReason, UnionFind, VpTree};
use crate::tlsh::{parse_digest, TlshDigest};

/// Recommended cluster distance threshold for TLSH digests.
pub const DEFAULT_CDIST: u32 = 30;

/// Clusters (sample id, digest) pairs. Identical digests always share a
/// cluster (distance zero), so they are collapsed before the tree is built;
/// queries then run over distinct digests only, in parallel.
pub fn hact_cluster(
    samples: &[(String, TlshDigest)],
    cdist: u32,
    exact: bool,
    seed: u64,
) -> Clustering {
    use std::collections::HashMap;

    let mut distinct: Vec<TlshDigest> = Vec::new();
    let mut rep_of: HashMap<TlshDigest, usize> = HashMap::new();
    let mut member_rep: Vec<usize> = Vec::with_capacity(samples.len());
    for (_, digest) in samples {
        let rep = *rep_of.entry(*digest).or_insert_with(|| {
            distinct.push(*digest);
            distinct.len() - 1
        });
        member_rep.push(rep);
    }

    let tree = VpTree::build(&distinct, seed);
    let neighbor_lists: Vec<Vec<u32>> = (0..distinct.len())
        .into_par_iter()
        .map(|i| tree.radius_query(&distinct[i], cdist, exact))
        .collect();

    // merge order cannot change the connected components
    let mut uf = UnionFind::new(distinct.len());
    for (i, neighbors) in neighbor_lists.iter().enumerate() {
        for &j in neighbors {
            uf.union(i, j as usize);
        }
    }

    let mut groups_by_root: HashMap<usize, Vec<String>> = HashMap::new();
    for (member, &rep) in member_rep.iter().enumerate() {
        let root = uf.find(rep);
        groups_by_root.entry(root).or_default().push(samples[member].0.clone());
    }
    let groups = groups_by_root
        .into_values()
        .map(|members| {
            let reason = if members.len() == 1 {
                SingletonReason::UniqueValue
            } else {
                SingletonReason::None
            };
            (members, reason)
        })
        .collect();
    Clustering::from_groups(groups)
}

/// Convenience wrapper over raw (sha256, tlsh hex) rows: samples whose tlsh
/// is NULL or undecodable become null-feature singletons, the rest are
/// clustered. Returns the clustering and the count of undecodable digests.
pub fn hact_over_samples<'a, I>(rows: I, cdist: u32, exact: bool, seed: u64) -> (Clustering, u64)
where
    I: IntoIterator<Item = (&'a str, Option<&'a str>)>,
{
    let mut with_digest: Vec<(String, TlshDigest)> = Vec::new();
    let mut null_groups: Vec<(Vec<String>, SingletonReason)> = Vec::new();
    let mut bad = 0u64;
    for (sha, tlsh) in rows {
        match tlsh.and_then(|t| parse_digest(t).ok()) {
            Some(digest) => with_digest.push((sha.to_string(), digest)),
            None => {
                if tlsh.is_some() {
                    bad += 1;
                }
                null_groups.push((vec![sha.to_string()], SingletonReason::NullFeature));
            }
        }
    }
    let clustered = hact_cluster(&with_digest, cdist, exact, seed);
    let mut groups: Vec<(Vec<String>, SingletonReason)> = clustered
        .clusters()
        .iter()
        .map(|c| (c.members.clone(), c.reason))
        .collect();
    groups.append(&mut null_groups);
    (Clustering::from_groups(groups), bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::testutil::clumped_digests;
    use crate::tlsh::distance;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_digest() -> TlshDigest {
        crate::tlsh::parse_digest(&"0".repeat(70)).unwrap()
    }

    #[test]
    fn threshold_boundary() {
        let base = zero_digest();
        let mut at_30 = base;
        at_30.body[0] = 0xFF; // four buckets at diff 3 -> 24
        at_30.body[1] = 0x03; // one bucket at diff 3 -> 6
        assert_eq!(distance(&base, &at_30), 30);
        let c = hact_cluster(
            &[("a".to_string(), base), ("b".to_string(), at_30)],
            DEFAULT_CDIST,
            true,
            1,
        );
        assert_eq!(c.len(), 1, "distance exactly 30 joins one cluster");

        let mut at_31 = at_30;
        at_31.body[1] = 0x07; // buckets at diff 3 and 1 -> 7
        assert_eq!(distance(&base, &at_31), 31);
        let c = hact_cluster(
            &[("a".to_string(), base), ("b".to_string(), at_31)],
            DEFAULT_CDIST,
            true,
            1,
        );
        assert_eq!(c.len(), 2, "distance 31 stays apart");
        assert!(c.clusters().iter().all(|cl| cl.reason == SingletonReason::UniqueValue));
    }

    /// Brute-force transitive closure of the <= cdist relation.
    fn closure_oracle(samples: &[(String, TlshDigest)], cdist: u32) -> Vec<Vec<String>> {
        let n = samples.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if distance(&samples[i].1, &samples[j].1) <= cdist {
                    uf.union(i, j);
                }
            }
        }
        let mut partition: Vec<Vec<String>> = uf
            .groups()
            .into_iter()
            .map(|g| {
                let mut names: Vec<String> = g.into_iter().map(|i| samples[i].0.clone()).collect();
                names.sort();
                names
            })
            .collect();
        partition.sort();
        partition
    }

    fn random_samples(n: usize, seed: u64) -> Vec<(String, TlshDigest)> {
        let digests = clumped_digests(n, seed);
        digests.into_iter().enumerate().map(|(i, d)| (format!("{i:064x}"), d)).collect()
    }

    #[test]
    fn exact_mode_equals_brute_force_closure() {
        for seed in [3, 5] {
            let samples = random_samples(600, seed);
            let got = hact_cluster(&samples, DEFAULT_CDIST, true, 17).partition();
            assert_eq!(got, closure_oracle(&samples, DEFAULT_CDIST));
        }
    }

    #[test]
    fn exact_mode_invariant_to_order_and_seed() {
        let samples = random_samples(400, 31);
        let a = hact_cluster(&samples, DEFAULT_CDIST, true, 1);
        let b = hact_cluster(&samples, DEFAULT_CDIST, true, 999);
        let mut shuffled = samples.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        let c = hact_cluster(&shuffled, DEFAULT_CDIST, true, 1);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn approximate_refines_exact() {
        let samples = random_samples(800, 37);
        let exact = hact_cluster(&samples, DEFAULT_CDIST, true, 7);
        let approx = hact_cluster(&samples, DEFAULT_CDIST, false, 7);
        assert!(approx.len() >= exact.len());
        let exact_assignment = exact.assignment();
        for cluster in approx.clusters() {
            let target = exact_assignment[cluster.members[0].as_str()];
            assert!(
                cluster.members.iter().all(|m| exact_assignment[m.as_str()] == target),
                "approximate cluster spans two exact clusters"
            );
        }
    }

    #[test]
    fn identical_digests_always_cluster() {
        let base = zero_digest();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<(String, TlshDigest)> =
            (0..50).map(|i| (format!("{i:064x}"), base)).collect();
        let approx = hact_cluster(&samples, 0, false, rng.random::<u64>());
        assert_eq!(approx.len(), 1);
        assert_eq!(approx.clusters()[0].members.len(), 50);
    }

    #[test]
    fn null_tlsh_becomes_null_singleton() {
        let hex = "1".repeat(70);
        let rows: Vec<(&str, Option<&str>)> = vec![
            ("a", Some(hex.as_str())),
            ("b", Some(hex.as_str())),
            ("c", None),
            ("d", Some("nothex")),
        ];
        let (c, bad) = hact_over_samples(rows, 30, true, 3);
        assert_eq!(bad, 1);
        assert_eq!(c.len(), 3);
        let reasons: Vec<SingletonReason> = c.clusters().iter().map(|cl| cl.reason).collect();
        assert_eq!(
            reasons,
            vec![SingletonReason::None, SingletonReason::NullFeature, SingletonReason::NullFeature]
        );
    }
}
