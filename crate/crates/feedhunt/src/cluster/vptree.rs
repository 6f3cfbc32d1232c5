//! Vantage-point tree over TLSH digests for radius queries.
//!
//! The reference TLSH score is not a metric (its header components jump by
//! multiples of 12 and the extreme bucket difference is over-weighted), so
//! the tree is organized and pruned in the space of
//! [`pruning_distance`](crate::tlsh::pruning_distance) -- a true metric that
//! never exceeds the score. Any digest within score `r` of the query is
//! also within metric distance `r`, so exact queries descend every subtree
//! the metric triangle inequality cannot rule out and then verify
//! candidates against the real score. Approximate queries follow only the
//! nearer child at each split (the trade-off behind the fast clustering
//! variant: missed edges split clusters, never merge them).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tlsh::{distance, pruning_distance, TlshDigest};

const LEAF_CAP: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf { items: Vec<u32> },
    Inner { vantage: u32, radius: u32, inside: usize, outside: usize },
}

/// Index over a fixed digest set; queries return indices into the original
/// slice. Construction is deterministic given the seed.
#[derive(Debug)]
pub struct VpTree {
    digests: Vec<TlshDigest>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl VpTree {
    pub fn build(digests: &[TlshDigest], seed: u64) -> Self {
        let mut tree = VpTree { digests: digests.to_vec(), nodes: Vec::new(), root: None };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices: Vec<u32> = (0..digests.len() as u32).collect();
        if !indices.is_empty() {
            let root = tree.build_node(indices, &mut rng);
            tree.root = Some(root);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.digests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digests.is_empty()
    }

    fn build_node(&mut self, mut indices: Vec<u32>, rng: &mut ChaCha8Rng) -> usize {
        if indices.len() <= LEAF_CAP {
            self.nodes.push(Node::Leaf { items: indices });
            return self.nodes.len() - 1;
        }
        let pick = rng.random_range(0..indices.len());
        let vantage = indices.swap_remove(pick);
        let vantage_digest = self.digests[vantage as usize];

        // split at the median metric distance to the vantage
        let mut scored: Vec<(u32, u32)> = indices
            .into_iter()
            .map(|i| (pruning_distance(&self.digests[i as usize], &vantage_digest), i))
            .collect();
        scored.sort_unstable();
        let radius = scored[(scored.len() - 1) / 2].0;

        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for (d, i) in scored {
            if d <= radius {
                inside.push(i);
            } else {
                outside.push(i);
            }
        }
        // vantage removal guarantees progress even when one side is empty
        let inside_id = self.build_node(inside, rng);
        let outside_id = self.build_node(outside, rng);
        self.nodes.push(Node::Inner { vantage, radius, inside: inside_id, outside: outside_id });
        self.nodes.len() - 1
    }

    /// All indices within score `r` of `q` when `exact`; a subset of that
    /// (nearer-child descent only) otherwise. Output sorted ascending.
    pub fn radius_query(&self, q: &TlshDigest, r: u32, exact: bool) -> Vec<u32> {
        let mut hits = Vec::new();
        let Some(root) = self.root else {
            return hits;
        };
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            match &self.nodes[node] {
                Node::Leaf { items } => {
                    for &i in items {
                        if distance(q, &self.digests[i as usize]) <= r {
                            hits.push(i);
                        }
                    }
                }
                Node::Inner { vantage, radius, inside, outside } => {
                    let vd = &self.digests[*vantage as usize];
                    if distance(q, vd) <= r {
                        hits.push(*vantage);
                    }
                    // descent decisions live in the metric space
                    let md = pruning_distance(q, vd);
                    if exact {
                        if md <= radius.saturating_add(r) {
                            stack.push(*inside);
                        }
                        if md.saturating_add(r) > *radius {
                            stack.push(*outside);
                        }
                    } else if md <= *radius {
                        stack.push(*inside);
                    } else {
                        stack.push(*outside);
                    }
                }
            }
        }
        hits.sort_unstable();
        hits
    }

    /// Checks the structural invariants: every digest reachable exactly
    /// once, inside subtrees within the split radius, outside beyond it.
    #[cfg(test)]
    fn check_invariants(&self) {
        use std::collections::HashSet;
        let mut seen: HashSet<u32> = HashSet::new();
        if let Some(root) = self.root {
            self.check_node(root, &mut seen, &[]);
        }
        assert_eq!(seen.len(), self.digests.len(), "every digest reachable exactly once");
    }

    #[cfg(test)]
    fn check_node(
        &self,
        node: usize,
        seen: &mut std::collections::HashSet<u32>,
        bounds: &[(u32, u32, bool)],
    ) {
        let check = |i: u32, bounds: &[(u32, u32, bool)]| {
            for &(vantage, radius, is_inside) in bounds {
                let d =
                    pruning_distance(&self.digests[i as usize], &self.digests[vantage as usize]);
                if is_inside {
                    assert!(d <= radius, "inside-subtree digest beyond radius");
                } else {
                    assert!(d > radius, "outside-subtree digest within radius");
                }
            }
        };
        match &self.nodes[node] {
            Node::Leaf { items } => {
                for &i in items {
                    assert!(seen.insert(i), "digest indexed twice");
                    check(i, bounds);
                }
            }
            Node::Inner { vantage, radius, inside, outside } => {
                assert!(seen.insert(*vantage), "digest indexed twice");
                check(*vantage, bounds);
                let mut inner = bounds.to_vec();
                inner.push((*vantage, *radius, true));
                self.check_node(*inside, seen, &inner);
                let mut outer = bounds.to_vec();
                outer.push((*vantage, *radius, false));
                self.check_node(*outside, seen, &outer);
            }
        }
    }
}
