//! Synthetic feed generator with a ground-truth manifest.
//!
//! Builds report streams with planted structure -- vhash clusters with known
//! detection mixes, rescans, undetected-member plants, flip histories, and
//! corrupted lines at recorded positions -- so pipeline runs can be checked
//! against exact expectations instead of eyeballed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::SampleFeatures;
use crate::report::{format_report_line, ReportRecord};
use crate::time::TimeWindow;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedSpec {
    pub seed: u64,
    /// Planted vhash clusters.
    pub clusters: usize,
    /// Cluster sizes are drawn from 1..=2*mean_size - 1.
    pub mean_size: usize,
    /// Fraction of clusters whose members have no vhash at all.
    pub null_cluster_pct: f64,
    /// Fraction of samples that get a second (later) report.
    pub rescan_pct: f64,
    /// Fraction of lines that are corrupted filler.
    pub corrupt_pct: f64,
    /// Planted flip histories: one detected-late sample, one excluded by the
    /// grace period, one that never flips, per unit.
    pub fud_units: usize,
    pub window: TimeWindow,
}

impl Default for FeedSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            clusters: 100,
            mean_size: 6,
            null_cluster_pct: 0.15,
            rescan_pct: 0.2,
            corrupt_pct: 0.01,
            fud_units: 5,
            window: TimeWindow::new(1_600_000_000, 1_600_000_000 + 30 * 86_400),
        }
    }
}

/// Everything a test needs to verify a pipeline run over the generated feed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeedManifest {
    pub total_lines: u64,
    pub valid_reports: u64,
    pub samples: u64,
    /// 1-based positions of corrupted lines.
    pub corrupt_lines: Vec<u64>,
    /// Expected cluster count for vhash grouping over the latest view.
    pub vhash_clusters: u64,
    /// Zero-detection members of non-singleton vhash clusters with
    /// r1 >= 0.5 / r4 >= 0.5, sorted.
    pub flagged_r1: Vec<String>,
    pub flagged_r4: Vec<String>,
    /// Samples that flipped from zero detections to >= 4 after the grace
    /// period, sorted.
    pub fud: Vec<String>,
}

struct SampleState {
    sha256: String,
    vhash: Option<String>,
    final_score: u32,
}

fn sha_for(id: u64) -> String {
    // deterministic, well-spread, lowercase
    format!("{:064x}", (id.wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ (id << 17))
}

fn random_tlsh(rng: &mut ChaCha8Rng) -> String {
    const HEX: &[u8] = b"0123456789ABCDEF";
    let mut s = String::with_capacity(72);
    s.push_str("T1");
    for _ in 0..70 {
        s.push(HEX[rng.random_range(0..16)] as char);
    }
    s
}

fn base_record(sha: &str, scan: i64, fseen: i64, score: u32) -> ReportRecord {
    ReportRecord {
        sha256: sha.to_string(),
        scan_date: scan,
        fseen_date: fseen,
        vt_score: score,
        detection_labels: (0..score.min(8))
            .map(|i| (format!("Engine{i}"), Some(format!("Trojan.Synthetic{}", i % 3))))
            .collect(),
        ..Default::default()
    }
}

/// Writes the feed to `path` and returns the manifest.
pub fn generate_feed(path: &Path, spec: &FeedSpec) -> io::Result<FeedManifest> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lines: Vec<String> = Vec::new();
    let mut states: Vec<SampleState> = Vec::new();
    let mut fud_expected: BTreeSet<String> = BTreeSet::new();
    let mut next_id = 0u64;
    let window = spec.window;
    let span = (window.end - window.start).max(2);
    let tags = ["peexe", "apk", "pdf", "javascript"];

    for k in 0..spec.clusters {
        let size = rng.random_range(1..=(2 * spec.mean_size).max(2) - 1);
        let null_cluster = rng.random_range(0.0..1.0) < spec.null_cluster_pct;
        let vhash =
            if null_cluster { None } else { Some(format!("{:032x}", (k as u64) * 2_654_435_761)) };
        // cluster detection profile: benign, heavily detected, or mixed
        let profile = rng.random_range(0..10u32);
        for _ in 0..size {
            let sha = sha_for(next_id);
            next_id += 1;
            let fseen = window.start + rng.random_range(0..span / 2);
            let score = match profile {
                0..=1 => 0,
                2..=6 => {
                    // mostly detected with occasional planted zero
                    match rng.random_range(0..10u32) {
                        0 => 0,
                        1 => rng.random_range(1..4),
                        _ => rng.random_range(4..40),
                    }
                }
                _ => rng.random_range(0..8),
            };
            let mut rec = base_record(&sha, fseen, fseen, score);
            rec.vhash = vhash.clone();
            rec.vt_tags = vec![tags[k % tags.len()].to_string()];
            if rng.random_range(0.0..1.0) < 0.5 {
                rec.tlsh = Some(random_tlsh(&mut rng));
            }
            lines.push(format_report_line(&rec));
            if rng.random_range(0.0..1.0) < spec.rescan_pct {
                let later = fseen + rng.random_range(1..span / 2);
                let mut rescan = rec.clone();
                rescan.scan_date = later;
                lines.push(format_report_line(&rescan));
            }
            states.push(SampleState { sha256: sha, vhash: vhash.clone(), final_score: score });
        }
    }

    // flip-history plants: detected late, flipped inside the grace period,
    // and never detected
    for _ in 0..spec.fud_units {
        let mk_pair = |rng: &mut ChaCha8Rng, next_id: &mut u64| {
            let sha = sha_for(*next_id);
            *next_id += 1;
            let fseen = window.start + rng.random_range(0..span / 4);
            (sha, fseen)
        };

        let (sha, fseen) = mk_pair(&mut rng, &mut next_id);
        let flip = fseen + 301 + rng.random_range(0..span / 4);
        lines.push(format_report_line(&base_record(&sha, fseen, fseen, 0)));
        lines.push(format_report_line(&base_record(&sha, flip, fseen, rng.random_range(4..30))));
        fud_expected.insert(sha.clone());
        states.push(SampleState { sha256: sha, vhash: None, final_score: 4 });

        let (sha, fseen) = mk_pair(&mut rng, &mut next_id);
        let flip = fseen + rng.random_range(1..=300);
        lines.push(format_report_line(&base_record(&sha, fseen, fseen, 0)));
        lines.push(format_report_line(&base_record(&sha, flip, fseen, 6)));
        states.push(SampleState { sha256: sha, vhash: None, final_score: 6 });

        let (sha, fseen) = mk_pair(&mut rng, &mut next_id);
        lines.push(format_report_line(&base_record(&sha, fseen, fseen, 0)));
        lines.push(format_report_line(&base_record(&sha, fseen + 86_400, fseen, 0)));
        states.push(SampleState { sha256: sha, vhash: None, final_score: 0 });
    }

    lines.shuffle(&mut rng);

    // corrupted filler lines at recorded positions; they never carry
    // expectation-bearing data
    let corrupt_count = ((lines.len() as f64) * spec.corrupt_pct).round() as usize;
    let total = lines.len() + corrupt_count;
    let mut positions: Vec<usize> = (0..total).collect();
    positions.shuffle(&mut rng);
    let corrupt_at: BTreeSet<usize> = positions.into_iter().take(corrupt_count).collect();
    let garbage = [
        "not a report at all".to_string(),
        "deadbeef\t\t\t100\t100\t0\t".to_string(), // sha too short
        format!("{}\t\t\t100\t200\t0\t", "a".repeat(64)), // fseen after scan
        format!("{}\t\t\t100\t100\t999\t", "b".repeat(64)), // score out of range
        format!("{}\t\t\tnotanumber\t100\t0\t", "c".repeat(64)),
        format!("{}\t\t\t100\t100\t0\t", "D".repeat(64)), // uppercase sha
    ];

    let mut w = BufWriter::new(File::create(path)?);
    let mut manifest = FeedManifest {
        total_lines: total as u64,
        valid_reports: lines.len() as u64,
        samples: states.len() as u64,
        ..Default::default()
    };
    let mut src = lines.into_iter();
    for pos in 0..total {
        if corrupt_at.contains(&pos) {
            manifest.corrupt_lines.push(pos as u64 + 1);
            writeln!(w, "{}", garbage[pos % garbage.len()])?;
        } else {
            writeln!(w, "{}", src.next().expect("line count mismatch"))?;
        }
    }
    w.flush()?;

    // expectations recounted from final sample states
    let mut by_vhash: BTreeMap<String, Vec<&SampleState>> = BTreeMap::new();
    let mut null_members = 0u64;
    for s in &states {
        match &s.vhash {
            Some(v) => by_vhash.entry(v.clone()).or_default().push(s),
            None => null_members += 1,
        }
    }
    manifest.vhash_clusters = by_vhash.len() as u64 + null_members;
    for members in by_vhash.values() {
        if members.len() < 2 {
            continue;
        }
        let n = members.len() as f64;
        let r1 = members.iter().filter(|s| s.final_score >= 1).count() as f64 / n;
        let r4 = members.iter().filter(|s| s.final_score >= 4).count() as f64 / n;
        for s in members.iter().filter(|s| s.final_score == 0) {
            if r1 >= 0.5 {
                manifest.flagged_r1.push(s.sha256.clone());
            }
            if r4 >= 0.5 {
                manifest.flagged_r4.push(s.sha256.clone());
            }
        }
    }
    manifest.flagged_r1.sort();
    manifest.flagged_r4.sort();
    manifest.fud = fud_expected.into_iter().collect();
    Ok(manifest)
}

/// A duplicate-heavy feature corpus with per-sample scan-date oracles for
/// both reduction views.
pub struct DedupCorpus {
    pub rows: Vec<SampleFeatures>,
    /// sha256 -> expected scan_date of the latest-report view (all samples).
    pub expected_latest: HashMap<String, i64>,
    /// sha256 -> expected scan_date of the first-report view (new samples
    /// only; three of four samples are new).
    pub expected_first: HashMap<String, i64>,
}

/// Builds `rows` feature rows over `distinct` samples, shuffled. Scan dates
/// stay within a per-sample band so expected winners are unambiguous.
pub fn dedup_corpus(rows: u64, distinct: u64, seed: u64) -> DedupCorpus {
    assert!(distinct > 0 && rows >= distinct);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<SampleFeatures> = Vec::with_capacity(rows as usize);
    let mut latest: HashMap<String, i64> = HashMap::with_capacity(distinct as usize);
    let mut first: HashMap<String, i64> = HashMap::with_capacity(distinct as usize);

    let is_new = |id: u64| id % 4 != 0;
    for id in 0..distinct {
        let sha = sha_for(id);
        out.push(SampleFeatures {
            sha256: sha.clone(),
            scan_date: id as i64 * 10,
            fseen_date: 0,
            is_new: is_new(id),
            ..Default::default()
        });
        latest.insert(sha.clone(), id as i64 * 10);
        if is_new(id) {
            first.insert(sha, id as i64 * 10);
        }
    }
    // remaining rows are duplicates of random samples at nearby offsets
    let mut extra = rows - distinct;
    let mut bump = 1i64;
    while extra > 0 {
        let id = rng.random_range(0..distinct);
        let sha = sha_for(id);
        let scan = id as i64 * 10 + bump % 9 - 4; // within +-4, never colliding across samples
        out.push(SampleFeatures {
            sha256: sha.clone(),
            scan_date: scan,
            fseen_date: 0,
            is_new: is_new(id),
            ..Default::default()
        });
        let l = latest.get_mut(&sha).expect("known sample");
        *l = (*l).max(scan);
        if let Some(f) = first.get_mut(&sha) {
            *f = (*f).min(scan);
        }
        bump += 1;
        extra -= 1;
    }
    out.shuffle(&mut rng);
    DedupCorpus { rows: out, expected_latest: latest, expected_first: first }
}
