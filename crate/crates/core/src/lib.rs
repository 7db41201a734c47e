//! Two-stage similarity search for 256-bit binary codes.
//!
//! Searching proceeds in two stages. A coarse filter splits a 64-bit
//! filtering code into four 16-bit subcodes and gathers every document that
//! matches any subcode within Hamming distance `d`, using a precomputed
//! neighbor table over the whole 16-bit value space. The surviving
//! candidates are then re-ranked by exact Hamming distance on the full
//! 256-bit codes. Because a distance-`r` pair must agree to distance
//! `floor(r / 4)` on at least one of four subcodes, the filter is lossless
//! up to radius `4d + 3`.
//!
//! The crate also provides:
//!
//! - [`partition`]: pairwise bit-correlation estimation and Kernighan-Lin
//!   bipartitioning, used to pick 64 mutually decorrelated bit positions
//!   when deriving the filtering code from the full code;
//! - [`es_export`]: emission of the equivalent Elasticsearch artifacts
//!   (neighbor-lookup documents, stored scoring script, index mappings,
//!   and the two-stage `function_score` query);
//! - [`eval`]: retrieval-quality (mean average precision) and latency
//!   harnesses plus a labeled synthetic corpus generator;
//! - [`persist`]: a checksummed on-disk index container.

pub mod codes;
pub mod codes_file;
pub mod error;
pub mod es_export;
pub mod eval;
pub mod index;
pub mod partition;
pub mod persist;

pub use codes::{
    hamming16, hamming256, hamming64, parse_code_hex, subcode_score, HammingDistance, LongCode,
    ParsedCode, ShortCode, Subcode16,
};
pub use codes_file::CodeRecord;
pub use error::{Error, Result};
pub use es_export::EsArtifact;
pub use eval::{EvalReport, LabeledQuery, LatencyStats, SyntheticConfig};
pub use index::{
    build_neighbor_table, DocId, DocumentRecord, IndexConfig, NeighborTable, RankedResult,
    SearchIndex, SearchMode,
};
pub use partition::{BitPartition, CorrelationGraph, ShortCodeExtractor};
