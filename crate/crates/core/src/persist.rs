//! On-disk index container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            9 bytes  "HAMSEARCH"
//! version          u32
//! radius           u32
//! default_mode     u8       0 = short, 1 = long, 2 = twostage
//! long_postings    u8       0 / 1
//! extractor        64 x u8  bit positions, selection order
//! label_count      u32
//! labels           label_count x { len: u16, utf-8 bytes }
//! doc_count        u64
//! docs             doc_count x {
//!                    id: u64,
//!                    long code: 4 x u64 (words in order),
//!                    short code: 4 x u16 (subcodes in order),
//!                    label_refs: u16 count, count x u32 into label table
//!                  }
//! checksum         8 bytes  leading bytes of SHA-256 over everything above
//! ```
//!
//! Only the document set and configuration are stored. Posting lists and the
//! neighbor table are cheap to rebuild relative to load I/O, so [`load_index`]
//! reconstructs them and revalidates the documents through the normal
//! ingestion path.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::codes::{LongCode, ShortCode};
use crate::error::{Error, Result};
use crate::index::{DocumentRecord, IndexConfig, SearchIndex, SearchMode};
use crate::partition::ShortCodeExtractor;

const MAGIC: &[u8; 9] = b"HAMSEARCH";
const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 8;
/// Fixed bytes per document before label references.
const DOC_FIXED_LEN: usize = 8 + 32 + 8 + 2;

fn mode_to_byte(mode: SearchMode) -> u8 {
    match mode {
        SearchMode::Short => 0,
        SearchMode::Long => 1,
        SearchMode::TwoStage => 2,
    }
}

fn mode_from_byte(byte: u8) -> Result<SearchMode> {
    match byte {
        0 => Ok(SearchMode::Short),
        1 => Ok(SearchMode::Long),
        2 => Ok(SearchMode::TwoStage),
        _ => Err(Error::CorruptIndex(format!("unknown mode byte {byte}"))),
    }
}

/// Serializes the index to its container bytes.
pub fn encode_index(index: &SearchIndex) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(128 + index.len() * (DOC_FIXED_LEN + 4));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&index.config().radius.to_le_bytes());
    buf.push(mode_to_byte(index.config().default_mode));
    buf.push(u8::from(index.has_long_postings()));
    for &pos in index.config().extractor.positions() {
        buf.push(pos as u8);
    }

    // Distinct labels in first-seen order (deterministic: records are
    // ordered by id and labels within a record are sorted).
    let mut label_ids: HashMap<&str, u32> = HashMap::new();
    let mut labels: Vec<&str> = Vec::new();
    for record in index.records() {
        for label in &record.labels {
            if label.len() > u16::MAX as usize {
                return Err(Error::LabelTooLong { id: record.id, len: label.len() });
            }
            label_ids.entry(label).or_insert_with(|| {
                labels.push(label);
                labels.len() as u32 - 1
            });
        }
    }
    buf.extend_from_slice(&(labels.len() as u32).to_le_bytes());
    for label in &labels {
        buf.extend_from_slice(&(label.len() as u16).to_le_bytes());
        buf.extend_from_slice(label.as_bytes());
    }

    buf.extend_from_slice(&(index.len() as u64).to_le_bytes());
    for record in index.records() {
        buf.extend_from_slice(&record.id.to_le_bytes());
        for word in record.long_code.words {
            buf.extend_from_slice(&word.to_le_bytes());
        }
        for subcode in record.short_code.subcodes {
            buf.extend_from_slice(&subcode.to_le_bytes());
        }
        buf.extend_from_slice(&(record.labels.len() as u16).to_le_bytes());
        for label in &record.labels {
            buf.extend_from_slice(&label_ids[label.as_str()].to_le_bytes());
        }
    }

    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest[..CHECKSUM_LEN]);
    Ok(buf)
}

/// Writes the index container to `path`, replacing any existing file.
pub fn save_index(index: &SearchIndex, path: &Path) -> Result<()> {
    fs::write(path, encode_index(index)?)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).ok_or(Error::Truncated)?;
        if end > self.buf.len() {
            return Err(Error::Truncated);
        }
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Deserializes an index from container bytes.
///
/// Check order: magic first (is this even an index file?), then the
/// trailing checksum over the whole body (bit rot anywhere inside),
/// then version, then structure. Each failure is reported distinctly.
pub fn decode_index(bytes: &[u8]) -> Result<SearchIndex> {
    if bytes.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
        return Err(Error::Truncated);
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    let body = &bytes[..bytes.len() - CHECKSUM_LEN];
    let stored = &bytes[bytes.len() - CHECKSUM_LEN..];
    let digest = Sha256::digest(body);
    if &digest[..CHECKSUM_LEN] != stored {
        return Err(Error::ChecksumMismatch);
    }

    let mut reader = Reader { buf: body, pos: MAGIC.len() };
    let version = reader.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let radius = reader.u32()?;
    let default_mode = mode_from_byte(reader.u8()?)?;
    let long_postings = reader.u8()? != 0;
    let positions: Vec<u16> = reader.take(64)?.iter().map(|&b| u16::from(b)).collect();
    let extractor = ShortCodeExtractor::new(positions)
        .map_err(|err| Error::CorruptIndex(err.to_string()))?;

    let label_count = reader.u32()? as usize;
    let mut labels: Vec<String> = Vec::with_capacity(label_count.min(1 << 20));
    for _ in 0..label_count {
        let len = reader.u16()? as usize;
        let text = std::str::from_utf8(reader.take(len)?)
            .map_err(|_| Error::CorruptIndex("label is not valid UTF-8".into()))?;
        labels.push(text.to_string());
    }

    let doc_count = reader.u64()? as usize;
    let remaining = body.len() - reader.pos;
    if doc_count.checked_mul(DOC_FIXED_LEN).is_none_or(|need| need > remaining) {
        return Err(Error::Truncated);
    }
    let mut records = Vec::with_capacity(doc_count);
    for _ in 0..doc_count {
        let id = reader.u64()?;
        let mut words = [0u64; 4];
        for word in &mut words {
            *word = reader.u64()?;
        }
        let mut subcodes = [0u16; 4];
        for subcode in &mut subcodes {
            *subcode = reader.u16()?;
        }
        let label_refs = reader.u16()? as usize;
        let mut doc_labels = Vec::with_capacity(label_refs);
        for _ in 0..label_refs {
            let reference = reader.u32()? as usize;
            let label = labels
                .get(reference)
                .ok_or_else(|| Error::CorruptIndex(format!("label reference {reference} out of range")))?;
            doc_labels.push(label.clone());
        }
        records.push(DocumentRecord::new(
            id,
            LongCode::new(words),
            ShortCode::new(subcodes),
            doc_labels,
        ));
    }
    if reader.pos != body.len() {
        return Err(Error::CorruptIndex("trailing bytes after document records".into()));
    }

    let config = IndexConfig::new(radius, extractor)?
        .with_default_mode(default_mode)
        .with_long_postings(long_postings);
    let mut index = SearchIndex::new(config)?;
    // Reingest through the validated path: rebuilds postings and the code
    // columns, and re-checks id uniqueness and extractor consistency.
    index.index_documents(records)?;
    Ok(index)
}

/// Reads and decodes an index container from `path`.
pub fn load_index(path: &Path) -> Result<SearchIndex> {
    decode_index(&fs::read(path)?)
}
