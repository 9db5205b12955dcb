//! Reader for the AMiner tag-prefixed flat format.
//!
//! ```text
//! #index 42
//! #* Paper title
//! #@ First Author;Second Author
//! #t 2007
//! #c Venue
//! #% 17
//! #% 23
//! #! Abstract text
//! ```
//!
//! Records are separated by blank lines. Unknown tags are ignored.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CorpusError, CorpusStore, RawPaper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordErrorKind {
    MissingTitle,
    MissingYear,
    InvalidYear,
    MissingId,
    DuplicateId,
}

/// A skipped record and the line its block started on (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub line: usize,
    pub kind: RecordErrorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub records_read: usize,
    pub papers_kept: usize,
    pub skipped: Vec<RecordError>,
    pub dangling_references: usize,
    pub checksum: String,
}

struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

#[derive(Default)]
struct PendingRecord {
    start_line: usize,
    id: Option<String>,
    title: Option<String>,
    authors: Vec<String>,
    year: Option<Result<i32, ()>>,
    venue: String,
    references: Vec<String>,
    abstract_text: String,
    touched: bool,
}

impl PendingRecord {
    fn finish(self) -> Option<Result<(usize, RawPaper), RecordError>> {
        if !self.touched {
            return None;
        }
        let err = |kind| Some(Err(RecordError { line: self.start_line, kind }));
        let title = match self.title {
            Some(t) if !t.is_empty() => t,
            _ => return err(RecordErrorKind::MissingTitle),
        };
        let year = match self.year {
            None => return err(RecordErrorKind::MissingYear),
            Some(Err(())) => return err(RecordErrorKind::InvalidYear),
            Some(Ok(y)) if y <= 0 => return err(RecordErrorKind::InvalidYear),
            Some(Ok(y)) => y,
        };
        let id = match self.id {
            Some(id) if !id.is_empty() => id,
            _ => return err(RecordErrorKind::MissingId),
        };
        Some(Ok((
            self.start_line,
            RawPaper {
                paper_id: id,
                title,
                abstract_text: self.abstract_text,
                authors: self.authors,
                venue: self.venue,
                year,
                references: self.references,
            },
        )))
    }
}

/// Parses an AMiner-format byte stream into a store.
///
/// Malformed records are skipped and listed in the report. Fails only when
/// no valid record remains or the stream cannot be read.
pub fn parse_corpus<R: Read>(source: R) -> Result<(CorpusStore, ParseReport), CorpusError> {
    let mut reader = BufReader::new(HashingReader {
        inner: source,
        hasher: Sha256::new(),
    });
    let mut report = ParseReport::default();
    let mut raw: Vec<RawPaper> = Vec::new();
    let mut raw_lines: Vec<usize> = Vec::new();
    let mut current = PendingRecord::default();
    let mut buf = Vec::new();
    let mut line_no = 0usize;

    let flush = |rec: PendingRecord, report: &mut ParseReport, raw: &mut Vec<RawPaper>, lines: &mut Vec<usize>| {
        if let Some(res) = rec.finish() {
            report.records_read += 1;
            match res {
                Ok((line, paper)) => {
                    raw.push(paper);
                    lines.push(line);
                }
                Err(e) => report.skipped.push(e),
            }
        }
    };

    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let text = String::from_utf8_lossy(&buf);
        let line = text.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            flush(std::mem::take(&mut current), &mut report, &mut raw, &mut raw_lines);
            continue;
        }
        if !current.touched {
            current.start_line = line_no;
            current.touched = true;
        }
        if let Some(rest) = line.strip_prefix("#index") {
            if current.id.is_some() {
                flush(std::mem::take(&mut current), &mut report, &mut raw, &mut raw_lines);
                current.start_line = line_no;
                current.touched = true;
            }
            current.id = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("#*") {
            current.title = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("#@") {
            current.authors = rest
                .split(';')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(str::to_string)
                .collect();
        } else if let Some(rest) = line.strip_prefix("#t") {
            let rest = rest.trim();
            current.year = if rest.is_empty() {
                None
            } else {
                Some(rest.parse::<i32>().map_err(|_| ()))
            };
        } else if let Some(rest) = line.strip_prefix("#c") {
            current.venue = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("#%") {
            let r = rest.trim();
            if !r.is_empty() {
                current.references.push(r.to_string());
            }
        } else if let Some(rest) = line.strip_prefix("#!") {
            if !current.abstract_text.is_empty() {
                current.abstract_text.push(' ');
            }
            current.abstract_text.push_str(rest.trim());
        }
    }
    flush(current, &mut report, &mut raw, &mut raw_lines);

    let checksum = hex::encode(reader.into_inner().hasher.finalize());
    report.checksum = checksum.clone();

    let (store, duplicates) = CorpusStore::from_raw(raw, checksum)?;
    for pos in duplicates {
        report.skipped.push(RecordError {
            line: raw_lines[pos],
            kind: RecordErrorKind::DuplicateId,
        });
    }
    report.skipped.sort_by_key(|e| e.line);
    report.papers_kept = store.num_papers();
    report.dangling_references = store.dangling_references().len();
    Ok((store, report))
}

pub fn parse_corpus_bytes(source: &[u8]) -> Result<(CorpusStore, ParseReport), CorpusError> {
    parse_corpus(source)
}

/// Writes records in the same tag format [`parse_corpus`] reads.
pub fn write_aminer<W: Write>(papers: &[RawPaper], mut out: W) -> std::io::Result<()> {
    for (i, p) in papers.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "#index {}", p.paper_id)?;
        writeln!(out, "#* {}", p.title)?;
        if !p.authors.is_empty() {
            writeln!(out, "#@ {}", p.authors.join(";"))?;
        }
        writeln!(out, "#t {}", p.year)?;
        if !p.venue.is_empty() {
            writeln!(out, "#c {}", p.venue)?;
        }
        for r in &p.references {
            writeln!(out, "#% {r}")?;
        }
        if !p.abstract_text.is_empty() {
            writeln!(out, "#! {}", p.abstract_text)?;
        }
    }
    Ok(())
}
