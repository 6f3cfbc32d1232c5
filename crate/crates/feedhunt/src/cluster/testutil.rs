//! Digest generators shared by clustering tests.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tlsh::{parse_digest, TlshDigest};

pub(crate) fn random_digests(n: usize, seed: u64) -> Vec<TlshDigest> {
    const HEX: &[u8] = b"0123456789ABCDEF";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let hex: String = (0..70).map(|_| HEX[rng.random_range(0..16)] as char).collect();
            parse_digest(&hex).unwrap()
        })
        .collect()
}

/// Random digests with planted near-duplicate chains so radius queries and
/// threshold clustering see non-trivial neighborhoods.
pub(crate) fn clumped_digests(n: usize, seed: u64) -> Vec<TlshDigest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<TlshDigest> = Vec::with_capacity(n);
    while out.len() < n {
        let base = random_digests(1, rng.random::<u64>())[0];
        out.push(base);
        let copies = rng.random_range(0..4usize).min(n - out.len());
        for _ in 0..copies {
            let mut d = base;
            // nudge a couple of buckets; stays within a small distance
            for _ in 0..rng.random_range(0..3usize) {
                let byte = rng.random_range(0..32usize);
                d.body[byte] ^= 1 << (2 * rng.random_range(0..4usize));
            }
            out.push(d);
        }
    }
    out
}
