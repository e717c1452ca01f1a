//! Raw dataset files → validated unified record streams, and corpus manifests.

pub mod adapters;
pub mod manifest;

use std::io::{self, BufRead};

use serde::Serialize;
use thiserror::Error;

pub use adapters::{convert_line, load_spider_tables, AdapterId, ConvertError, IngestOptions};
pub use manifest::{build_manifest, CorpusManifest, ManifestEntry, ManifestError};

use crate::schema::{validate_record, UnifiedRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectKind {
    MalformedLine,
    AdapterMismatch,
    ValidationFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based input line number.
    pub line: usize,
    pub kind: RejectKind,
    pub reason: String,
}

/// Line-level accounting: `read == emitted + rejected`. One accepted line may
/// expand into several records (`records`), e.g. one per dialogue turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub read: usize,
    pub emitted: usize,
    pub rejected: usize,
    pub records: usize,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: input does not match adapter: {reason}")]
    AdapterMismatch { line: usize, reason: String },
    #[error("line {line}: record failed validation: {reason}")]
    ValidationFailure { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<Diagnostic> for IngestError {
    fn from(d: Diagnostic) -> Self {
        match d.kind {
            RejectKind::MalformedLine => IngestError::MalformedLine { line: d.line, reason: d.reason },
            RejectKind::AdapterMismatch => IngestError::AdapterMismatch { line: d.line, reason: d.reason },
            RejectKind::ValidationFailure => IngestError::ValidationFailure { line: d.line, reason: d.reason },
        }
    }
}

fn process_line(adapter: AdapterId, line_no: usize, bytes: &[u8], opts: &IngestOptions) -> Result<Vec<UnifiedRecord>, Diagnostic> {
    let diag = |kind, reason: String| Diagnostic {
        line: line_no,
        kind,
        reason,
    };
    let line = std::str::from_utf8(bytes).map_err(|e| diag(RejectKind::MalformedLine, format!("invalid UTF-8: {e}")))?;
    let records = convert_line(adapter, line, opts).map_err(|e| match e {
        ConvertError::Malformed(r) => diag(RejectKind::MalformedLine, r),
        ConvertError::Mismatch(r) => diag(RejectKind::AdapterMismatch, r),
    })?;
    for (i, r) in records.iter().enumerate() {
        let report = validate_record(r);
        if !report.is_ok() {
            return Err(diag(RejectKind::ValidationFailure, format!("record {i}: {report}")));
        }
    }
    Ok(records)
}

/// Runs `adapter` over every line of `source`, handing each accepted record to
/// `sink` in input order. Blank lines are skipped. Rejected lines are counted
/// and described in the report, or abort the run when `opts.strict` is set.
pub fn ingest<R, F>(adapter: AdapterId, mut source: R, opts: &IngestOptions, mut sink: F) -> Result<IngestReport, IngestError>
where
    R: BufRead,
    F: FnMut(UnifiedRecord) -> io::Result<()>,
{
    let mut report = IngestReport::default();
    let mut buf = Vec::with_capacity(1024);
    let mut line_no = 0;
    loop {
        buf.clear();
        if source.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let trimmed = buf.strip_suffix(b"\n").unwrap_or(&buf);
        let trimmed = trimmed.strip_suffix(b"\r").unwrap_or(trimmed);
        if trimmed.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        report.read += 1;
        match process_line(adapter, line_no, trimmed, opts) {
            Ok(records) => {
                report.emitted += 1;
                report.records += records.len();
                for r in records {
                    sink(r)?;
                }
            }
            Err(d) => {
                if opts.strict {
                    return Err(d.into());
                }
                report.rejected += 1;
                report.diagnostics.push(d);
            }
        }
    }
    Ok(report)
}

/// Collects the output of [`ingest`] into memory.
pub fn ingest_to_vec<R: BufRead>(adapter: AdapterId, source: R, opts: &IngestOptions) -> Result<(Vec<UnifiedRecord>, IngestReport), IngestError> {
    let mut out = Vec::new();
    let report = ingest(adapter, source, opts, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok((out, report))
}
