//! TLSH digest decoding and the reference distance scoring.
//!
//! Only digest parsing and comparison live here; computing digests from file
//! bytes is out of scope because the pipeline never sees sample content.

use std::fmt;
use std::sync::LazyLock;

use thiserror::Error;

/// Hex length of a digest without version prefix.
pub const DIGEST_HEX_LEN: usize = 70;
/// Body size in bytes: 128 buckets at two bits each.
pub const BODY_BYTES: usize = 32;
/// Raw distances at or above this are treated as "unrelated" when mapping
/// into [0, 1] for the weighted multi-feature distance.
pub const DISTANCE_CAP: u32 = 300;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvalidDigest {
    #[error("digest must be {DIGEST_HEX_LEN} hex chars (72 with a T1 prefix), got {0}")]
    BadLength(usize),
    #[error("digest contains a non-hex character")]
    BadCharset,
}

/// A decoded TLSH value: one checksum byte, the log-length byte, two
/// quartile-ratio nibbles, and 128 two-bit body buckets packed into 32 bytes.
///
/// Byte/nibble layout follows the reference wire format: the checksum and
/// log-length hex pairs are nibble-swapped and the body bytes appear in
/// reverse order in the hex string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TlshDigest {
    pub checksum: u8,
    pub lvalue: u8,
    pub q1ratio: u8,
    pub q2ratio: u8,
    pub body: [u8; BODY_BYTES],
}

#[inline]
fn swap_nibbles(b: u8) -> u8 {
    (b >> 4) | (b << 4)
}

fn hex_val(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

/// Decodes a digest from hex text. Accepts the bare 70-char form and the
/// 72-char form with a leading version prefix `T1` (case-insensitive).
pub fn parse_digest(hex: &str) -> Result<TlshDigest, InvalidDigest> {
    let bytes = hex.as_bytes();
    let body_hex = match bytes.len() {
        DIGEST_HEX_LEN => bytes,
        l if l == DIGEST_HEX_LEN + 2 => {
            if !(bytes[0] == b'T' || bytes[0] == b't') || bytes[1] != b'1' {
                return Err(InvalidDigest::BadCharset);
            }
            &bytes[2..]
        }
        l => return Err(InvalidDigest::BadLength(l)),
    };

    let mut raw = [0u8; 35];
    for (i, chunk) in body_hex.chunks_exact(2).enumerate() {
        let hi = hex_val(chunk[0]).ok_or(InvalidDigest::BadCharset)?;
        let lo = hex_val(chunk[1]).ok_or(InvalidDigest::BadCharset)?;
        raw[i] = (hi << 4) | lo;
    }

    let qb = raw[2];
    let mut body = [0u8; BODY_BYTES];
    for (i, b) in body.iter_mut().enumerate() {
        // hex carries the body reversed
        *b = raw[3 + BODY_BYTES - 1 - i];
    }

    Ok(TlshDigest {
        checksum: swap_nibbles(raw[0]),
        lvalue: swap_nibbles(raw[1]),
        q1ratio: qb >> 4,
        q2ratio: qb & 0x0F,
        body,
    })
}

impl TlshDigest {
    /// Canonical uppercase hex without version prefix; inverse of
    /// [`parse_digest`].
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(DIGEST_HEX_LEN);
        let mut push = |b: u8| out.push_str(&format!("{b:02X}"));
        push(swap_nibbles(self.checksum));
        push(swap_nibbles(self.lvalue));
        push((self.q1ratio << 4) | (self.q2ratio & 0x0F));
        for i in (0..BODY_BYTES).rev() {
            push(self.body[i]);
        }
        out
    }

    /// Bucket value (0..=3) at position `i` in 0..128.
    pub fn bucket(&self, i: usize) -> u8 {
        (self.body[i / 4] >> (2 * (i % 4))) & 0x03
    }
}

impl fmt::Display for TlshDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

// Per-byte body tables: each byte packs four two-bit buckets. `scored`
// applies the reference penalty (a bucket difference of 3 scores 6);
// `l1` is the plain sum of bucket differences, used as the metric
// lower bound for index pruning.
struct BodyTables {
    scored: Box<[[u8; 256]; 256]>,
    l1: Box<[[u8; 256]; 256]>,
}

static BIT_PAIRS: LazyLock<BodyTables> = LazyLock::new(|| {
    let mut scored = Box::new([[0u8; 256]; 256]);
    let mut l1 = Box::new([[0u8; 256]; 256]);
    for x in 0..256usize {
        for y in 0..256usize {
            let (mut a, mut b) = (x, y);
            let (mut s, mut m) = (0u8, 0u8);
            for _ in 0..4 {
                let diff = (a % 4).abs_diff(b % 4) as u8;
                s += if diff == 3 { 6 } else { diff };
                m += diff;
                a /= 4;
                b /= 4;
            }
            scored[x][y] = s;
            l1[x][y] = m;
        }
    }
    BodyTables { scored, l1 }
});

#[inline]
fn mod_diff(x: u8, y: u8, range: u16) -> u32 {
    let (x, y) = (x as u16, y as u16);
    let d = if x >= y { x - y } else { y - x };
    u32::from(d.min(range - d))
}

/// The reference TLSH score between two digests, length component included.
/// Symmetric, and zero exactly for identical digests.
///
/// Not a true metric: the length and quartile components jump from 1 to a
/// multiple of 12 between adjacent circular differences, and a bucket
/// difference of 3 scores 6, all of which break the triangle inequality.
/// Index structures prune with [`pruning_distance`] instead.
pub fn distance(a: &TlshDigest, b: &TlshDigest) -> u32 {
    let mut total = match mod_diff(a.lvalue, b.lvalue, 256) {
        d @ 0..=1 => d,
        d => d * 12,
    };
    for (qa, qb) in [(a.q1ratio, b.q1ratio), (a.q2ratio, b.q2ratio)] {
        total += match mod_diff(qa, qb, 16) {
            d @ 0..=1 => d,
            d => (d - 1) * 12,
        };
    }
    if a.checksum != b.checksum {
        total += 1;
    }
    let scored = &BIT_PAIRS.scored;
    for i in 0..BODY_BYTES {
        total += u32::from(scored[a.body[i] as usize][b.body[i] as usize]);
    }
    total
}

/// A true metric that never exceeds [`distance`]: circular header
/// differences without the x12 penalties, checksum equality, and the plain
/// L1 distance over body buckets. Each term is a metric and stays at or
/// below its scored counterpart, so a ball of radius r under the score is
/// contained in the same ball under this bound -- which is what makes
/// triangle-inequality pruning sound for the non-metric score.
pub fn pruning_distance(a: &TlshDigest, b: &TlshDigest) -> u32 {
    let mut total = mod_diff(a.lvalue, b.lvalue, 256)
        + mod_diff(a.q1ratio, b.q1ratio, 16)
        + mod_diff(a.q2ratio, b.q2ratio, 16);
    if a.checksum != b.checksum {
        total += 1;
    }
    let l1 = &BIT_PAIRS.l1;
    for i in 0..BODY_BYTES {
        total += u32::from(l1[a.body[i] as usize][b.body[i] as usize]);
    }
    total
}

/// Distance mapped into [0, 1]: `min(distance, cap) / cap` with the cap at
/// [`DISTANCE_CAP`]. Order-preserving below the cap.
pub fn normalized_distance(a: &TlshDigest, b: &TlshDigest) -> f64 {
    f64::from(distance(a, b).min(DISTANCE_CAP)) / f64::from(DISTANCE_CAP)
}
