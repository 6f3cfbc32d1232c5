//! External merge sort for tab-separated files.
//!
//! Chunked in-memory sorts spilled to a temp directory, then a k-way heap
//! merge. Stable on the key columns, byte-lexicographic, with a configurable
//! memory budget. Leading `#` header lines pass through untouched.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::report::open_report_file;

/// Estimated heap overhead per buffered row: String header, vec slot,
/// allocator slack, and the sort's temporary buffer.
const ROW_OVERHEAD: usize = 96;
/// Floor so tiny budgets still make progress.
const MIN_BUDGET: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum SortError {
    #[error("sort spill failed: {0}")]
    Spill(#[source] io::Error),
    #[error("{path}:{line}: row has no key column {column}")]
    MalformedRow { path: PathBuf, line: u64, column: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Key columns, compared in order, as raw bytes.
#[derive(Debug, Clone)]
pub struct SortSpec {
    pub key_columns: Vec<usize>,
}

impl SortSpec {
    pub fn new(key_columns: Vec<usize>) -> Self {
        Self { key_columns }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SortReport {
    pub rows: u64,
    pub chunks: usize,
    /// Wall time of the chunking/sorting phase, seconds.
    pub sort_secs: f64,
    /// Wall time of the merge/write phase, seconds.
    pub merge_secs: f64,
}

fn column_of(line: &str, idx: usize) -> Option<&str> {
    line.split('\t').nth(idx)
}

fn compare_by_keys(a: &str, b: &str, keys: &[usize]) -> Ordering {
    for &k in keys {
        let ka = column_of(a, k).unwrap_or("");
        let kb = column_of(b, k).unwrap_or("");
        match ka.as_bytes().cmp(kb.as_bytes()) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

/// Key columns joined with NUL; column-wise lexicographic order is preserved
/// because rows cannot contain NUL or tab inside a column.
fn extract_key(line: &str, keys: &[usize]) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, &k) in keys.iter().enumerate() {
        if i > 0 {
            out.push(0);
        }
        out.extend_from_slice(column_of(line, k).unwrap_or("").as_bytes());
    }
    out
}

struct MergeEntry {
    key: Vec<u8>,
    chunk: usize,
    line: String,
}

impl PartialEq for MergeEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.chunk == other.chunk
    }
}
impl Eq for MergeEntry {}
impl PartialOrd for MergeEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MergeEntry {
    // reversed: BinaryHeap is a max-heap, we pop the smallest. Chunk index
    // breaks ties so equal keys come out in input order (stability).
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key).then_with(|| other.chunk.cmp(&self.chunk))
    }
}

/// Sorts `input` into `output`. Peak memory stays within `budget_bytes` plus
/// a small constant; rows missing a key column abort with `MalformedRow`.
/// On failure the spill directory and any partial output are removed.
pub fn external_sort(
    input: &Path,
    output: &Path,
    spec: &SortSpec,
    budget_bytes: usize,
    temp_dir: Option<&Path>,
) -> Result<SortReport, SortError> {
    sort_inner(input, output, spec, budget_bytes, temp_dir).inspect_err(|_| {
        let _ = std::fs::remove_file(output);
    })
}

fn sort_inner(
    input: &Path,
    output: &Path,
    spec: &SortSpec,
    budget_bytes: usize,
    temp_dir: Option<&Path>,
) -> Result<SortReport, SortError> {
    let budget = budget_bytes.max(MIN_BUDGET);
    let max_key = spec.key_columns.iter().copied().max().unwrap_or(0);
    let mut report = SortReport::default();

    let tmp = match temp_dir {
        Some(dir) => tempfile::Builder::new().prefix("extsort").tempdir_in(dir),
        None => tempfile::Builder::new().prefix("extsort").tempdir(),
    }
    .map_err(SortError::Spill)?;

    let sort_started = Instant::now();
    let reader = open_report_file(input)?;
    let mut headers: Vec<String> = Vec::new();
    let mut chunk: Vec<String> = Vec::new();
    let mut chunk_bytes = 0usize;
    let mut chunk_paths: Vec<PathBuf> = Vec::new();
    let mut line_no = 0u64;
    let mut body_seen = false;

    let spill = |chunk: &mut Vec<String>, paths: &mut Vec<PathBuf>| -> Result<(), SortError> {
        chunk.sort_by(|a, b| compare_by_keys(a, b, &spec.key_columns));
        let path = tmp.path().join(format!("chunk-{:06}", paths.len()));
        let mut w = BufWriter::new(File::create(&path).map_err(SortError::Spill)?);
        for line in chunk.iter() {
            writeln!(w, "{line}").map_err(SortError::Spill)?;
        }
        w.flush().map_err(SortError::Spill)?;
        paths.push(path);
        chunk.clear();
        Ok(())
    };

    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        if !body_seen && line.starts_with('#') {
            headers.push(line);
            continue;
        }
        if line.is_empty() {
            continue;
        }
        body_seen = true;
        if line.split('\t').count() <= max_key {
            return Err(SortError::MalformedRow {
                path: input.to_path_buf(),
                line: line_no,
                column: max_key,
            });
        }
        report.rows += 1;
        chunk_bytes += line.len() + ROW_OVERHEAD;
        chunk.push(line);
        if chunk_bytes >= budget {
            spill(&mut chunk, &mut chunk_paths)?;
            chunk_bytes = 0;
        }
    }

    let mut out = BufWriter::new(File::create(output)?);
    for h in &headers {
        writeln!(out, "{h}")?;
    }

    if chunk_paths.is_empty() {
        // everything fit in one chunk; no merge pass needed
        chunk.sort_by(|a, b| compare_by_keys(a, b, &spec.key_columns));
        report.chunks = 1;
        report.sort_secs = sort_started.elapsed().as_secs_f64();
        let merge_started = Instant::now();
        for line in &chunk {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        report.merge_secs = merge_started.elapsed().as_secs_f64();
        return Ok(report);
    }

    if !chunk.is_empty() {
        spill(&mut chunk, &mut chunk_paths)?;
    }
    report.chunks = chunk_paths.len();
    report.sort_secs = sort_started.elapsed().as_secs_f64();

    let merge_started = Instant::now();
    let mut readers: Vec<io::Lines<BufReader<File>>> = Vec::with_capacity(chunk_paths.len());
    for p in &chunk_paths {
        readers.push(BufReader::new(File::open(p).map_err(SortError::Spill)?).lines());
    }
    let mut heap: BinaryHeap<MergeEntry> = BinaryHeap::with_capacity(readers.len());
    for (i, r) in readers.iter_mut().enumerate() {
        if let Some(line) = r.next() {
            let line = line.map_err(SortError::Spill)?;
            heap.push(MergeEntry { key: extract_key(&line, &spec.key_columns), chunk: i, line });
        }
    }
    while let Some(entry) = heap.pop() {
        writeln!(out, "{}", entry.line)?;
        if let Some(line) = readers[entry.chunk].next() {
            let line = line.map_err(SortError::Spill)?;
            heap.push(MergeEntry {
                key: extract_key(&line, &spec.key_columns),
                chunk: entry.chunk,
                line,
            });
        }
    }
    out.flush()?;
    report.merge_secs = merge_started.elapsed().as_secs_f64();
    Ok(report)
}
