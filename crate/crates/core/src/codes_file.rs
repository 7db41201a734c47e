//! The plain-text codes file.
//!
//! One document per line:
//!
//! ```text
//! doc_id<TAB>64-hex long code[<TAB>comma-separated labels]
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. The same format
//! carries evaluation query sets (where labels are mandatory) and ingestion
//! batches (where labels are optional).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::codes::LongCode;
use crate::error::{Error, Result};
use crate::index::{DocId, DocumentRecord};
use crate::partition::ShortCodeExtractor;

/// One parsed codes-file line: an id, a full code, and optional labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeRecord {
    pub id: DocId,
    pub long_code: LongCode,
    pub labels: Vec<String>,
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::CodesFile { line, message: message.into() }
}

/// Parses codes-file text. Errors name the offending 1-based line.
pub fn parse_codes_file(text: &str) -> Result<Vec<CodeRecord>> {
    let mut records = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let id_text = fields.next().expect("split yields at least one field");
        let code_text = fields
            .next()
            .ok_or_else(|| malformed(line_no, "expected doc_id<TAB>long-code"))?;
        let labels_text = fields.next();
        if fields.next().is_some() {
            return Err(malformed(line_no, "too many tab-separated fields (at most 3)"));
        }
        let id: DocId = id_text
            .trim()
            .parse()
            .map_err(|_| malformed(line_no, format!("invalid doc id {:?}", id_text.trim())))?;
        let long_code = LongCode::parse_hex(code_text.trim())
            .map_err(|err| malformed(line_no, err.to_string()))?;
        let labels = match labels_text {
            None => Vec::new(),
            Some(text) => text
                .split(',')
                .map(|label| {
                    let label = label.trim();
                    if label.is_empty() {
                        Err(malformed(line_no, "empty label"))
                    } else {
                        Ok(label.to_string())
                    }
                })
                .collect::<Result<Vec<String>>>()?,
        };
        records.push(CodeRecord { id, long_code, labels });
    }
    Ok(records)
}

/// Reads and parses a codes file.
pub fn read_codes_file(path: &Path) -> Result<Vec<CodeRecord>> {
    parse_codes_file(&fs::read_to_string(path)?)
}

/// Renders records back into codes-file text.
pub fn format_codes_file(records: &[CodeRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 80);
    for record in records {
        let _ = write!(out, "{}\t{}", record.id, record.long_code.format_hex());
        if !record.labels.is_empty() {
            let _ = write!(out, "\t{}", record.labels.join(","));
        }
        out.push('\n');
    }
    out
}

/// Writes records as a codes file.
pub fn write_codes_file(path: &Path, records: &[CodeRecord]) -> Result<()> {
    fs::write(path, format_codes_file(records))?;
    Ok(())
}

/// Converts parsed records into index documents, deriving short codes with
/// `extractor`.
pub fn to_documents(records: &[CodeRecord], extractor: &ShortCodeExtractor) -> Vec<DocumentRecord> {
    records
        .iter()
        .map(|record| {
            DocumentRecord::from_long_code(
                record.id,
                record.long_code,
                extractor,
                record.labels.clone(),
            )
        })
        .collect()
}
