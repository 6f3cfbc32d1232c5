//! Per-sample feature vectors, the report-to-feature reduction, and the
//! versioned tab-separated feature file (`#ffv1`).

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::filetype::{derive_filetype, FiletypeMapping};
use crate::labeler::LabelResult;
use crate::report::{open_report_file, ReportRecord};
use crate::time::TimeWindow;

pub const FEATURE_FILE_VERSION: &str = "#ffv1";

/// Deduplicated per-sample feature vector; the clustering input row.
/// Every optional feature is either NULL or non-empty text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleFeatures {
    pub sha256: String,
    pub scan_date: i64,
    pub fseen_date: i64,
    pub vt_score: u32,
    pub filetype: Option<String>,
    pub family: Option<String>,
    pub is_pup: Option<bool>,
    pub tlsh: Option<String>,
    pub vhash: Option<String>,
    pub imphash: Option<String>,
    pub richpe_hash: Option<String>,
    pub authentihash: Option<String>,
    pub icon_hash: Option<String>,
    pub cert_thumbprint: Option<String>,
    pub package_name: Option<String>,
    /// First submission fell inside the analysis window.
    pub is_new: bool,
}

impl SampleFeatures {
    /// Number of non-NULL optional features; used as the dedup tie-breaker.
    pub fn non_null_features(&self) -> usize {
        [
            self.filetype.is_some(),
            self.family.is_some(),
            self.is_pup.is_some(),
            self.tlsh.is_some(),
            self.vhash.is_some(),
            self.imphash.is_some(),
            self.richpe_hash.is_some(),
            self.authentihash.is_some(),
            self.icon_hash.is_some(),
            self.cert_thumbprint.is_some(),
            self.package_name.is_some(),
        ]
        .into_iter()
        .filter(|b| *b)
        .count()
    }
}

fn norm_text(v: &Option<String>) -> Option<String> {
    v.as_deref().map(str::trim).filter(|s| !s.is_empty()).map(String::from)
}

fn norm_hash(v: &Option<String>) -> Option<String> {
    norm_text(v).map(|s| s.to_lowercase())
}

/// Reduces one report (plus an optional labeling outcome) to its feature
/// vector. Hash-like features are lowercased, free text trimmed, and
/// `is_new` is set exactly when `fseen_date` falls inside `window`
/// (start-inclusive, end-exclusive).
pub fn extract_features(
    report: &ReportRecord,
    label_result: Option<&LabelResult>,
    window: TimeWindow,
    mapping: &FiletypeMapping,
) -> SampleFeatures {
    SampleFeatures {
        sha256: report.sha256.clone(),
        scan_date: report.scan_date,
        fseen_date: report.fseen_date,
        vt_score: report.vt_score,
        filetype: derive_filetype(
            report.trid_file_type.as_deref(),
            &report.vt_tags,
            report.vt_meaningful_name.as_deref(),
            mapping,
        ),
        family: label_result.and_then(|l| l.family.clone()),
        is_pup: label_result.map(|l| l.is_pup),
        tlsh: norm_hash(&report.tlsh),
        vhash: norm_hash(&report.vhash),
        imphash: norm_hash(&report.imphash),
        richpe_hash: norm_hash(&report.richpe_hash),
        authentihash: norm_hash(&report.authentihash),
        icon_hash: norm_hash(&report.icon_hash),
        cert_thumbprint: norm_hash(&report.cert_thumbprint),
        package_name: norm_text(&report.package_name),
        is_new: window.contains(report.fseen_date),
    }
}

// Keyed reductions: both views pick one row per sha256 with an order-free
// merge, so results do not depend on how the input stream is partitioned.
// Ties on (scan_date, richness) fall back to input position.

fn latest_wins(a: &SampleFeatures, a_ord: u64, b: &SampleFeatures, b_ord: u64) -> bool {
    // true when b should replace a
    (b.scan_date, b.non_null_features(), std::cmp::Reverse(b_ord))
        > (a.scan_date, a.non_null_features(), std::cmp::Reverse(a_ord))
}

fn first_wins(a: &SampleFeatures, a_ord: u64, b: &SampleFeatures, b_ord: u64) -> bool {
    (b.scan_date, std::cmp::Reverse(b.non_null_features()), b_ord)
        < (a.scan_date, std::cmp::Reverse(a.non_null_features()), a_ord)
}

/// One row per sha256: the row with maximal scan_date, preferring richer
/// rows then earlier input on ties. Output sorted by sha256. Idempotent.
pub fn dedup_latest<I: IntoIterator<Item = SampleFeatures>>(rows: I) -> Vec<SampleFeatures> {
    let mut by_hash: HashMap<String, (SampleFeatures, u64)> = HashMap::new();
    for (ord, row) in rows.into_iter().enumerate() {
        let ord = ord as u64;
        match by_hash.get_mut(&row.sha256) {
            None => {
                by_hash.insert(row.sha256.clone(), (row, ord));
            }
            Some((kept, kept_ord)) => {
                if latest_wins(kept, *kept_ord, &row, ord) {
                    *kept = row;
                    *kept_ord = ord;
                }
            }
        }
    }
    let mut out: Vec<SampleFeatures> = by_hash.into_values().map(|(r, _)| r).collect();
    out.sort_by(|a, b| a.sha256.cmp(&b.sha256));
    out
}

/// One row per new sample (`is_new`): the row with minimal scan_date,
/// preferring richer rows then earlier input on ties. Sorted by sha256.
pub fn first_reports<I: IntoIterator<Item = SampleFeatures>>(rows: I) -> Vec<SampleFeatures> {
    let mut by_hash: HashMap<String, (SampleFeatures, u64)> = HashMap::new();
    for (ord, row) in rows.into_iter().enumerate() {
        if !row.is_new {
            continue;
        }
        let ord = ord as u64;
        match by_hash.get_mut(&row.sha256) {
            None => {
                by_hash.insert(row.sha256.clone(), (row, ord));
            }
            Some((kept, kept_ord)) => {
                if first_wins(kept, *kept_ord, &row, ord) {
                    *kept = row;
                    *kept_ord = ord;
                }
            }
        }
    }
    let mut out: Vec<SampleFeatures> = by_hash.into_values().map(|(r, _)| r).collect();
    out.sort_by(|a, b| a.sha256.cmp(&b.sha256));
    out
}

// ---- feature file ----

/// Fixed column order of the feature file.
pub const FEATURE_COLUMNS: [&str; 16] = [
    "sha256", "scan_date", "fseen_date", "vt_score", "filetype", "family", "is_pup", "tlsh",
    "vhash", "imphash", "richpe_hash", "authentihash", "icon_hash", "cert_thumbprint",
    "package_name", "is_new",
];

pub fn format_feature_line(f: &SampleFeatures) -> String {
    let o = |v: &Option<String>| v.clone().unwrap_or_default();
    [
        f.sha256.clone(),
        f.scan_date.to_string(),
        f.fseen_date.to_string(),
        f.vt_score.to_string(),
        o(&f.filetype),
        o(&f.family),
        f.is_pup.map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default(),
        o(&f.tlsh),
        o(&f.vhash),
        o(&f.imphash),
        o(&f.richpe_hash),
        o(&f.authentihash),
        o(&f.icon_hash),
        o(&f.cert_thumbprint),
        o(&f.package_name),
        if f.is_new { "1" } else { "0" }.to_string(),
    ]
    .join("\t")
}

pub fn parse_feature_line(line: &str) -> Result<SampleFeatures, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != FEATURE_COLUMNS.len() {
        return Err(format!("expected {} columns, got {}", FEATURE_COLUMNS.len(), cols.len()));
    }
    let opt = |i: usize| -> Option<String> {
        if cols[i].is_empty() { None } else { Some(cols[i].to_string()) }
    };
    Ok(SampleFeatures {
        sha256: cols[0].to_string(),
        scan_date: cols[1].parse().map_err(|_| "bad scan_date".to_string())?,
        fseen_date: cols[2].parse().map_err(|_| "bad fseen_date".to_string())?,
        vt_score: cols[3].parse().map_err(|_| "bad vt_score".to_string())?,
        filetype: opt(4),
        family: opt(5),
        is_pup: match cols[6] {
            "" => None,
            "1" => Some(true),
            "0" => Some(false),
            other => return Err(format!("bad is_pup value {other:?}")),
        },
        tlsh: opt(7),
        vhash: opt(8),
        imphash: opt(9),
        richpe_hash: opt(10),
        authentihash: opt(11),
        icon_hash: opt(12),
        cert_thumbprint: opt(13),
        package_name: opt(14),
        is_new: cols[15] == "1",
    })
}

pub fn write_feature_file(path: &Path, rows: &[SampleFeatures]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{FEATURE_FILE_VERSION}")?;
    for row in rows {
        writeln!(w, "{}", format_feature_line(row))?;
    }
    w.flush()
}

/// Loads a whole feature file, enforcing the `#ffv1` version header.
pub fn read_feature_file(path: &Path) -> io::Result<Vec<SampleFeatures>> {
    let reader = open_report_file(path)?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if !saw_header {
                if line.trim() != FEATURE_FILE_VERSION {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("unsupported feature file version {:?}", line.trim()),
                    ));
                }
                saw_header = true;
            }
            continue;
        }
        if !saw_header {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}: missing {FEATURE_FILE_VERSION} header", path.display()),
            ));
        }
        let row = parse_feature_line(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), no + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// The nine single-value clustering features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClusterFeature {
    Tlsh,
    Vhash,
    Imphash,
    RichpeHash,
    Authentihash,
    IconHash,
    CertThumbprint,
    PackageName,
    Family,
}

impl ClusterFeature {
    pub const ALL: [ClusterFeature; 9] = [
        ClusterFeature::Tlsh,
        ClusterFeature::Vhash,
        ClusterFeature::Imphash,
        ClusterFeature::RichpeHash,
        ClusterFeature::Authentihash,
        ClusterFeature::IconHash,
        ClusterFeature::CertThumbprint,
        ClusterFeature::PackageName,
        ClusterFeature::Family,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClusterFeature::Tlsh => "tlsh",
            ClusterFeature::Vhash => "vhash",
            ClusterFeature::Imphash => "imphash",
            ClusterFeature::RichpeHash => "richpe_hash",
            ClusterFeature::Authentihash => "authentihash",
            ClusterFeature::IconHash => "icon_hash",
            ClusterFeature::CertThumbprint => "cert_thumbprint",
            ClusterFeature::PackageName => "package_name",
            ClusterFeature::Family => "family",
        }
    }

    /// Column index in the feature file.
    pub fn column(self) -> usize {
        FEATURE_COLUMNS.iter().position(|c| *c == self.name()).expect("feature column exists")
    }

    pub fn value_of(self, f: &SampleFeatures) -> Option<&str> {
        match self {
            ClusterFeature::Tlsh => f.tlsh.as_deref(),
            ClusterFeature::Vhash => f.vhash.as_deref(),
            ClusterFeature::Imphash => f.imphash.as_deref(),
            ClusterFeature::RichpeHash => f.richpe_hash.as_deref(),
            ClusterFeature::Authentihash => f.authentihash.as_deref(),
            ClusterFeature::IconHash => f.icon_hash.as_deref(),
            ClusterFeature::CertThumbprint => f.cert_thumbprint.as_deref(),
            ClusterFeature::PackageName => f.package_name.as_deref(),
            ClusterFeature::Family => f.family.as_deref(),
        }
    }
}

impl FromStr for ClusterFeature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClusterFeature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

impl fmt::Display for ClusterFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
