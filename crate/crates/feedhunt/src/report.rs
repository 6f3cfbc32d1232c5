//! Scan-report records and the line-delimited input format.
//!
//! One report per line, tab-separated, fixed column order (see
//! `docs/report-format.md`). A report captures one scan of one sample;
//! the same sample may appear many times across a stream.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

pub const REPORT_COLUMNS: usize = 23;
/// Columns through `detection_labels`; shorter lines are rejected, missing
/// trailing columns are treated as NULL.
pub const REPORT_MIN_COLUMNS: usize = 7;
/// Sanity bound on the engine-count field.
pub const MAX_VT_SCORE: u32 = 200;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed record: {reason}")]
pub struct MalformedRecord {
    pub reason: String,
}

impl MalformedRecord {
    fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }
}

/// One parsed scan report.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportRecord {
    pub sha256: String,
    pub sha1: Option<String>,
    pub md5: Option<String>,
    pub scan_date: i64,
    pub fseen_date: i64,
    pub vt_score: u32,
    /// (engine, label); a missing label means the engine was listed without
    /// a detection.
    pub detection_labels: Vec<(String, Option<String>)>,
    pub trid_file_type: Option<String>,
    pub vt_tags: Vec<String>,
    pub vt_meaningful_name: Option<String>,
    pub tlsh: Option<String>,
    pub vhash: Option<String>,
    pub imphash: Option<String>,
    pub richpe_hash: Option<String>,
    pub authentihash: Option<String>,
    pub icon_hash: Option<String>,
    pub cert_thumbprint: Option<String>,
    pub cert_subject: Option<String>,
    pub cert_issuer: Option<String>,
    pub cert_valid_from: Option<i64>,
    pub cert_valid_to: Option<i64>,
    pub sig_verification_res: Option<String>,
    pub package_name: Option<String>,
}

fn is_hex(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_hexdigit())
}

fn is_lower_hex(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

fn opt(field: &str) -> Option<String> {
    let t = field.trim();
    if t.is_empty() { None } else { Some(t.to_string()) }
}

fn opt_hex(field: &str, name: &str, len: Option<usize>) -> Result<Option<String>, MalformedRecord> {
    match opt(field) {
        None => Ok(None),
        Some(v) => {
            if !is_hex(&v) {
                return Err(MalformedRecord::new(format!("{name} is not hex")));
            }
            if let Some(l) = len {
                if v.len() != l {
                    return Err(MalformedRecord::new(format!("{name} must be {l} hex chars")));
                }
            }
            Ok(Some(v))
        }
    }
}

fn opt_epoch(field: &str, name: &str) -> Result<Option<i64>, MalformedRecord> {
    match opt(field) {
        None => Ok(None),
        Some(v) => v
            .parse::<i64>()
            .map(Some)
            .map_err(|_| MalformedRecord::new(format!("{name} is not an integer"))),
    }
}

fn req_epoch(field: &str, name: &str) -> Result<i64, MalformedRecord> {
    opt_epoch(field, name)?.ok_or_else(|| MalformedRecord::new(format!("{name} is missing")))
}

fn opt_tlsh(field: &str) -> Result<Option<String>, MalformedRecord> {
    match opt(field) {
        None => Ok(None),
        Some(v) => {
            // digests come both bare and with the T1 version prefix
            let body = if v.len() == 72 && (v.starts_with("T1") || v.starts_with("t1")) {
                &v[2..]
            } else {
                v.as_str()
            };
            if !is_hex(body) {
                return Err(MalformedRecord::new("tlsh is not hex"));
            }
            Ok(Some(v))
        }
    }
}

fn parse_labels(field: &str) -> Vec<(String, Option<String>)> {
    field
        .split('|')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| match pair.split_once('=') {
            Some((engine, label)) => (engine.trim().to_string(), opt(label)),
            None => (pair.trim().to_string(), None),
        })
        .collect()
}

fn format_labels(labels: &[(String, Option<String>)]) -> String {
    labels
        .iter()
        .map(|(e, l)| match l {
            Some(l) => format!("{e}={l}"),
            None => e.clone(),
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Parses one line of the report format. Unknown trailing columns are
/// ignored; missing optional trailing columns are NULL. Never panics on
/// hostile input -- callers count errors and keep streaming.
pub fn parse_report_line(line: &str) -> Result<ReportRecord, MalformedRecord> {
    let cols: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
    if cols.len() < REPORT_MIN_COLUMNS {
        return Err(MalformedRecord::new(format!(
            "expected at least {REPORT_MIN_COLUMNS} columns, got {}",
            cols.len()
        )));
    }
    let col = |i: usize| -> &str { cols.get(i).copied().unwrap_or("") };

    let sha256 = col(0).trim().to_string();
    if sha256.len() != 64 || !is_lower_hex(&sha256) {
        return Err(MalformedRecord::new("sha256 must be 64 lowercase hex chars"));
    }

    let scan_date = req_epoch(col(3), "scan_date")?;
    let fseen_date = req_epoch(col(4), "fseen_date")?;
    if fseen_date > scan_date {
        return Err(MalformedRecord::new("fseen_date is after scan_date"));
    }

    let vt_score: u32 = col(5)
        .trim()
        .parse()
        .map_err(|_| MalformedRecord::new("vt_score is not a non-negative integer"))?;
    if vt_score > MAX_VT_SCORE {
        return Err(MalformedRecord::new(format!("vt_score exceeds {MAX_VT_SCORE}")));
    }

    Ok(ReportRecord {
        sha256,
        sha1: opt_hex(col(1), "sha1", Some(40))?,
        md5: opt_hex(col(2), "md5", Some(32))?,
        scan_date,
        fseen_date,
        vt_score,
        detection_labels: parse_labels(col(6)),
        trid_file_type: opt(col(7)),
        vt_tags: col(8)
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect(),
        vt_meaningful_name: opt(col(9)),
        tlsh: opt_tlsh(col(10))?,
        vhash: opt(col(11)),
        imphash: opt_hex(col(12), "imphash", Some(32))?,
        richpe_hash: opt_hex(col(13), "richpe_hash", None)?,
        authentihash: opt_hex(col(14), "authentihash", Some(64))?,
        icon_hash: opt_hex(col(15), "icon_hash", None)?,
        cert_thumbprint: opt_hex(col(16), "cert_thumbprint", None)?,
        cert_subject: opt(col(17)),
        cert_issuer: opt(col(18)),
        cert_valid_from: opt_epoch(col(19), "cert_valid_from")?,
        cert_valid_to: opt_epoch(col(20), "cert_valid_to")?,
        sig_verification_res: opt(col(21)),
        package_name: opt(col(22)),
    })
}

/// Renders a record as one line of the report format. Tab and newline bytes
/// in free-text fields are replaced with spaces so the row stays parseable.
pub fn format_report_line(r: &ReportRecord) -> String {
    fn clean(s: &str) -> String {
        s.replace(['\t', '\n', '\r'], " ")
    }
    let o = |v: &Option<String>| v.as_deref().map(clean).unwrap_or_default();
    let e = |v: &Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
    [
        r.sha256.clone(),
        o(&r.sha1),
        o(&r.md5),
        r.scan_date.to_string(),
        r.fseen_date.to_string(),
        r.vt_score.to_string(),
        clean(&format_labels(&r.detection_labels)),
        o(&r.trid_file_type),
        clean(&r.vt_tags.join(",")),
        o(&r.vt_meaningful_name),
        o(&r.tlsh),
        o(&r.vhash),
        o(&r.imphash),
        o(&r.richpe_hash),
        o(&r.authentihash),
        o(&r.icon_hash),
        o(&r.cert_thumbprint),
        o(&r.cert_subject),
        o(&r.cert_issuer),
        e(&r.cert_valid_from),
        e(&r.cert_valid_to),
        o(&r.sig_verification_res),
        o(&r.package_name),
    ]
    .join("\t")
}

/// Opens a report file, transparently decompressing `.gz` inputs.
pub fn open_report_file(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz")) {
        let gz: Box<dyn Read + Send> = Box::new(flate2::read::GzDecoder::new(file));
        Ok(Box::new(BufReader::new(gz)))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Streaming reader over a report file. Malformed lines are counted, not
/// fatal; blank lines and `#` comments are skipped silently.
pub struct ReportReader {
    lines: io::Lines<Box<dyn BufRead + Send>>,
    pub line_no: u64,
    pub errors: u64,
    pub error_lines: Vec<u64>,
}

impl ReportReader {
    pub fn open(path: &Path) -> io::Result<Self> {
        Ok(Self {
            lines: open_report_file(path)?.lines(),
            line_no: 0,
            errors: 0,
            error_lines: Vec::new(),
        })
    }
}

impl Iterator for ReportReader {
    type Item = io::Result<ReportRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e)),
            };
            self.line_no += 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match parse_report_line(&line) {
                Ok(rec) => return Some(Ok(rec)),
                Err(_) => {
                    self.errors += 1;
                    self.error_lines.push(self.line_no);
                }
            }
        }
    }
}
