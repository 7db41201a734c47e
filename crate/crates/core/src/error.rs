//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by code parsing, indexing, searching, evaluation, and
/// index-file persistence.
#[derive(Debug, Error)]
pub enum Error {
    /// A hex code string had the wrong number of characters.
    #[error("expected {expected} hex characters, got {got}")]
    BadHexLength { expected: usize, got: usize },

    /// A code string was neither a long (64 hex) nor a short (16 hex) code.
    #[error("code must be 64 hex characters (long) or 16 hex characters (short), got {got}")]
    BadCodeLength { got: usize },

    /// A code string contained a character outside `[0-9a-fA-F]`.
    #[error("invalid hex character {found:?} at position {position}")]
    BadHexChar { found: char, position: usize },

    /// A Hamming-ball radius outside the representable range for 16-bit subcodes.
    #[error("radius {0} is out of range; subcode radius must lie in [0, 16]")]
    RadiusOutOfRange(u32),

    /// A result-list size of zero was requested.
    #[error("k must be at least 1")]
    InvalidK,

    /// A top-N cutoff of zero was passed to average precision.
    #[error("top-N cutoff must be at least 1")]
    InvalidTopN,

    /// Too few codes to estimate pairwise bit correlations.
    #[error("correlation sample must contain at least 2 codes, got {0}")]
    SampleTooSmall(usize),

    /// Kernighan-Lin bipartitioning needs an even number of nodes.
    #[error("cannot bipartition an odd number of positions ({0})")]
    OddPartition(usize),

    /// A four-way bit partition failed validation.
    #[error("invalid bit partition: {0}")]
    InvalidPartition(String),

    /// A short-code extractor failed validation or parsing.
    #[error("invalid extractor: {0}")]
    BadExtractor(String),

    /// A batch tried to add a document id that already exists (in the index
    /// or twice within the batch itself).
    #[error("duplicate doc id {0}")]
    DuplicateDocId(u64),

    /// A document's stored short code disagrees with the index extractor
    /// applied to its long code.
    #[error("short code of doc {0} does not match the extractor applied to its long code")]
    ShortCodeMismatch(u64),

    /// A re-rank candidate id is not present in the index.
    #[error("doc id {0} is not indexed")]
    UnknownDocId(u64),

    /// Long mode was requested on an index built without long-subcode postings.
    #[error("long mode unavailable: index was built without long-subcode postings")]
    LongPostingsUnavailable,

    /// The index would exceed the internal document-slot capacity.
    #[error("index cannot hold more than {} documents", u32::MAX)]
    TooManyDocuments,

    /// A malformed line in a codes file.
    #[error("codes file line {line}: {message}")]
    CodesFile { line: usize, message: String },

    /// A malformed service or tool configuration entry.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A per-bit flip probability outside `[0, 0.5)`.
    #[error("flip probability must lie in [0, 0.5), got {0}")]
    InvalidFlipProbability(f64),

    /// An inconsistent synthetic-corpus configuration.
    #[error("invalid synthetic corpus config: {0}")]
    InvalidSyntheticConfig(String),

    /// Quality evaluation needs at least one labeled document.
    #[error("evaluation requires at least one labeled document in the index")]
    NoLabeledDocuments,

    /// An evaluation or benchmark was started with no queries.
    #[error("query set is empty")]
    EmptyQuerySet,

    /// An evaluation query carries no labels.
    #[error("query {0} has no labels")]
    UnlabeledQuery(u64),

    /// Too few queries to leave any measurements after warmup.
    #[error("not enough queries: {got} provided, {warmup} reserved for warmup")]
    NotEnoughQueries { got: usize, warmup: usize },

    /// A label exceeds the persistable length limit.
    #[error("label of doc {id} is {len} bytes; labels are limited to 65535 bytes")]
    LabelTooLong { id: u64, len: usize },

    /// The file is not an index file at all.
    #[error("not an index file (bad magic)")]
    BadMagic,

    /// The index file comes from an incompatible format revision.
    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),

    /// The index file ends before its declared contents.
    #[error("index file is truncated")]
    Truncated,

    /// The index file checksum does not match its contents.
    #[error("index file checksum mismatch: file is corrupted")]
    ChecksumMismatch,

    /// The checksum is intact but the decoded structure is inconsistent,
    /// which indicates a writer bug rather than bit rot.
    #[error("corrupt index file: {0}")]
    CorruptIndex(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
