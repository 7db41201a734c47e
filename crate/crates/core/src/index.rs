//! The in-memory search engine: neighbor table, per-subcode posting lists,
//! and the two-stage coarse-filter / re-rank search.
//!
//! The coarse filter treats each document's filtering code as four 16-bit
//! subcode fields, each with an inverted posting map over the full 16-bit
//! value space. A query gathers, for each of its four subcodes, the posting
//! lists of every value within Hamming distance `d` (looked up in a
//! precomputed neighbor table) and unions them. By the pigeonhole argument,
//! any document within distance `4d + 3` of the query's 64-bit code matches
//! at least one subcode within `d`, so the union never misses such a
//! document. Candidates are then re-ranked by exact distance on the 256-bit
//! codes. `Long` mode applies the same construction directly to the sixteen
//! 16-bit subcodes of the 256-bit code (lossless up to `16d + 15`) at the
//! cost of a larger candidate set.

use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes::{self, LongCode, ShortCode, Subcode16, LONG_BITS, SHORT_BITS, SUBCODE_BITS};
use crate::error::{Error, Result};
use crate::partition::ShortCodeExtractor;

/// Document identifier. Ids are assigned by the caller and must be unique
/// within an index.
pub type DocId = u64;

/// Number of distinct 16-bit subcode values.
pub const SUBCODE_SPACE: usize = 1 << 16;
/// Subcode fields of a filtering code.
pub const SHORT_FIELDS: usize = 4;
/// Subcode fields of a full code.
pub const LONG_FIELDS: usize = 16;

/// One posting map: for each 16-bit value, the slots of the documents whose
/// relevant subcode equals that value, ascending.
type PostingLists = Vec<Vec<u32>>;

fn empty_postings() -> PostingLists {
    vec![Vec::new(); SUBCODE_SPACE]
}

/// Precomputed Hamming balls over the 16-bit subcode space: for every value
/// `v`, the sorted list of values within distance `radius` of `v`. All
/// entries have the same length, so the table is one flat allocation.
#[derive(Clone, Debug)]
pub struct NeighborTable {
    radius: u32,
    entry_len: usize,
    flat: Vec<u16>,
}

impl NeighborTable {
    /// Builds the full table for `radius` in `[0, 16]`.
    pub fn build(radius: u32) -> Result<Self> {
        let entry_len = codes::hamming_ball_size(radius)?;
        let masks = codes::ball_masks(radius);
        let mut flat = vec![0u16; SUBCODE_SPACE * entry_len];
        for value in 0..SUBCODE_SPACE {
            let entry = &mut flat[value * entry_len..(value + 1) * entry_len];
            for (slot, &mask) in entry.iter_mut().zip(&masks) {
                *slot = value as u16 ^ mask;
            }
            entry.sort_unstable();
        }
        Ok(Self { radius, entry_len, flat })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Neighbors per entry: `sum_{i<=radius} C(16, i)`.
    pub fn entry_len(&self) -> usize {
        self.entry_len
    }

    /// Number of entries (always the whole 16-bit space).
    pub fn len(&self) -> usize {
        SUBCODE_SPACE
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The sorted Hamming ball around `value`.
    #[inline]
    pub fn neighbors(&self, value: Subcode16) -> &[u16] {
        let start = value as usize * self.entry_len;
        &self.flat[start..start + self.entry_len]
    }
}

/// Builds the neighbor table for `radius`.
pub fn build_neighbor_table(radius: u32) -> Result<NeighborTable> {
    NeighborTable::build(radius)
}

/// How a search ranks and which field set it filters on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Filter on the four 64-bit-code subcodes, rank by 64-bit distance.
    Short,
    /// Filter on the sixteen 256-bit-code subcodes, rank by 256-bit distance.
    Long,
    /// Filter on the four 64-bit-code subcodes, rank by 256-bit distance.
    TwoStage,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SearchMode::Short => "short",
            SearchMode::Long => "long",
            SearchMode::TwoStage => "twostage",
        };
        f.write_str(name)
    }
}

impl FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "short" => Ok(SearchMode::Short),
            "long" => Ok(SearchMode::Long),
            "twostage" => Ok(SearchMode::TwoStage),
            other => Err(format!(
                "unknown mode {other:?}; expected short, long, or twostage"
            )),
        }
    }
}

/// A document as stored in the index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentRecord {
    pub id: DocId,
    pub long_code: LongCode,
    pub short_code: ShortCode,
    /// Sorted, duplicate-free label set used for relevance judgments.
    pub labels: Vec<String>,
}

impl DocumentRecord {
    /// Normalizes the label set (sorted, duplicate-free).
    pub fn new(id: DocId, long_code: LongCode, short_code: ShortCode, mut labels: Vec<String>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        Self { id, long_code, short_code, labels }
    }

    /// Derives the short code from the long code with `extractor`.
    pub fn from_long_code(
        id: DocId,
        long_code: LongCode,
        extractor: &ShortCodeExtractor,
        labels: Vec<String>,
    ) -> Self {
        let short_code = extractor.extract(&long_code);
        Self::new(id, long_code, short_code, labels)
    }
}

/// One search hit. `score` is `code_bits - distance` for the ranking code
/// width (256 for `Long`/`TwoStage`, 64 for `Short`), so higher is closer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedResult {
    pub id: DocId,
    pub distance: u32,
    pub score: u32,
}

/// Static configuration of a [`SearchIndex`].
#[derive(Clone, Debug)]
pub struct IndexConfig {
    /// Hamming-ball radius `d` of the coarse filter.
    pub radius: u32,
    /// How filtering codes are derived from full codes.
    pub extractor: ShortCodeExtractor,
    /// Mode used when a caller does not specify one.
    pub default_mode: SearchMode,
    /// Whether postings over the sixteen long-code subcodes are maintained;
    /// `Long` mode requires them, and they roughly quadruple posting memory.
    pub long_postings: bool,
}

impl IndexConfig {
    pub fn new(radius: u32, extractor: ShortCodeExtractor) -> Result<Self> {
        if radius > SUBCODE_BITS {
            return Err(Error::RadiusOutOfRange(radius));
        }
        Ok(Self { radius, extractor, default_mode: SearchMode::TwoStage, long_postings: true })
    }

    pub fn with_default_mode(mut self, mode: SearchMode) -> Self {
        self.default_mode = mode;
        self
    }

    pub fn with_long_postings(mut self, enabled: bool) -> Self {
        self.long_postings = enabled;
        self
    }
}

/// Summary counters exposed for stats endpoints and tooling.
#[derive(Clone, Debug, Serialize)]
pub struct IndexStats {
    pub docs: usize,
    pub radius: u32,
    pub default_mode: SearchMode,
    pub long_postings: bool,
    pub neighbor_entry_len: usize,
}

/// The in-memory two-stage search index.
///
/// Ingestion is batch-atomic: a batch is fully validated before any state
/// changes, so a failed batch leaves the index untouched. Ties in ranking
/// are broken by ascending document id, which makes every search result
/// deterministic.
#[derive(Clone, Debug)]
pub struct SearchIndex {
    config: IndexConfig,
    neighbors: NeighborTable,
    /// Documents sorted by id; a document's position is its slot.
    store: Vec<DocumentRecord>,
    /// Dense code columns by slot, kept separate from `store` so the
    /// re-ranking loop touches only code data.
    long_words: Vec<[u64; 4]>,
    short_words: Vec<u64>,
    short_postings: [PostingLists; SHORT_FIELDS],
    long_postings: Option<Vec<PostingLists>>,
}

impl SearchIndex {
    /// Creates an empty index; builds the neighbor table eagerly.
    pub fn new(config: IndexConfig) -> Result<Self> {
        let neighbors = NeighborTable::build(config.radius)?;
        let long_postings = config
            .long_postings
            .then(|| (0..LONG_FIELDS).map(|_| empty_postings()).collect());
        Ok(Self {
            config,
            neighbors,
            store: Vec::new(),
            long_words: Vec::new(),
            short_words: Vec::new(),
            short_postings: std::array::from_fn(|_| empty_postings()),
            long_postings,
        })
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn neighbor_table(&self) -> &NeighborTable {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    /// All documents, ascending by id.
    pub fn records(&self) -> &[DocumentRecord] {
        &self.store
    }

    pub fn has_long_postings(&self) -> bool {
        self.long_postings.is_some()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            docs: self.store.len(),
            radius: self.config.radius,
            default_mode: self.config.default_mode,
            long_postings: self.long_postings.is_some(),
            neighbor_entry_len: self.neighbors.entry_len(),
        }
    }

    pub fn get(&self, id: DocId) -> Option<&DocumentRecord> {
        self.slot_of(id).map(|slot| &self.store[slot as usize])
    }

    #[inline]
    fn slot_of(&self, id: DocId) -> Option<u32> {
        self.store
            .binary_search_by_key(&id, |record| record.id)
            .ok()
            .map(|slot| slot as u32)
    }

    /// Adds a batch of documents. The whole batch is validated first —
    /// duplicate ids (against the index or within the batch) and short codes
    /// that disagree with the extractor are rejected — and only then
    /// applied, so observers never see a partial batch. Returns the number
    /// of documents added.
    pub fn index_documents(&mut self, records: Vec<DocumentRecord>) -> Result<usize> {
        if records.is_empty() {
            return Ok(0);
        }
        let mut batch_ids: Vec<DocId> = records.iter().map(|record| record.id).collect();
        batch_ids.sort_unstable();
        for pair in batch_ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateDocId(pair[0]));
            }
        }
        for record in &records {
            if self.slot_of(record.id).is_some() {
                return Err(Error::DuplicateDocId(record.id));
            }
            if self.config.extractor.extract(&record.long_code) != record.short_code {
                return Err(Error::ShortCodeMismatch(record.id));
            }
        }
        if self.store.len() + records.len() > u32::MAX as usize {
            return Err(Error::TooManyDocuments);
        }
        let added = records.len();
        self.store.extend(records);
        self.store.sort_unstable_by_key(|record| record.id);
        self.rebuild_derived();
        Ok(added)
    }

    /// Recomputes slot-indexed columns and posting lists from `store`.
    /// Pushing slots in ascending order keeps every posting list ascending,
    /// and therefore every gathered candidate list mergeable by sort+dedup.
    fn rebuild_derived(&mut self) {
        self.long_words.clear();
        self.long_words.extend(self.store.iter().map(|r| r.long_code.words));
        self.short_words.clear();
        self.short_words.extend(self.store.iter().map(|r| r.short_code.as_u64()));

        for field in &mut self.short_postings {
            for list in field.iter_mut() {
                list.clear();
            }
        }
        for (slot, record) in self.store.iter().enumerate() {
            for (j, &subcode) in record.short_code.subcodes.iter().enumerate() {
                self.short_postings[j][subcode as usize].push(slot as u32);
            }
        }
        if let Some(long_postings) = &mut self.long_postings {
            for field in long_postings.iter_mut() {
                for list in field.iter_mut() {
                    list.clear();
                }
            }
            for (slot, record) in self.store.iter().enumerate() {
                for (j, field) in long_postings.iter_mut().enumerate() {
                    field[record.long_code.subcode16(j) as usize].push(slot as u32);
                }
            }
        }
    }

    /// The posting list for short-code field `j` (0..4) and `value`, as ids.
    pub fn short_posting(&self, field: usize, value: Subcode16) -> Vec<DocId> {
        self.short_postings[field][value as usize]
            .iter()
            .map(|&slot| self.store[slot as usize].id)
            .collect()
    }

    /// The posting list for long-code field `j` (0..16) and `value`, as ids;
    /// `None` when the index maintains no long postings.
    pub fn long_posting(&self, field: usize, value: Subcode16) -> Option<Vec<DocId>> {
        self.long_postings.as_ref().map(|postings| {
            postings[field][value as usize]
                .iter()
                .map(|&slot| self.store[slot as usize].id)
                .collect()
        })
    }

    fn filter_slots_short(&self, query: &ShortCode) -> Vec<u32> {
        let mut slots = Vec::new();
        for (j, &subcode) in query.subcodes.iter().enumerate() {
            for &value in self.neighbors.neighbors(subcode) {
                slots.extend_from_slice(&self.short_postings[j][value as usize]);
            }
        }
        slots.sort_unstable();
        slots.dedup();
        slots
    }

    fn filter_slots_long(&self, query: &LongCode) -> Result<Vec<u32>> {
        let long_postings = self.long_postings.as_ref().ok_or(Error::LongPostingsUnavailable)?;
        let mut slots = Vec::new();
        for (j, field) in long_postings.iter().enumerate() {
            for &value in self.neighbors.neighbors(query.subcode16(j)) {
                slots.extend_from_slice(&field[value as usize]);
            }
        }
        slots.sort_unstable();
        slots.dedup();
        Ok(slots)
    }

    /// The coarse candidate set for a filtering code: every document whose
    /// 64-bit code matches the query on at least one subcode within the
    /// index radius. Sorted ascending by id, duplicate-free.
    pub fn coarse_filter(&self, query: &ShortCode) -> Vec<DocId> {
        self.filter_slots_short(query)
            .into_iter()
            .map(|slot| self.store[slot as usize].id)
            .collect()
    }

    /// Top-k over `slots` by `(distance, id)` ascending. `slots` must be
    /// duplicate-free. Results come back sorted by ascending distance with
    /// ties broken by ascending id.
    fn rank_slots(
        &self,
        slots: &[u32],
        k: usize,
        code_bits: u32,
        mut distance: impl FnMut(u32) -> u32,
    ) -> Vec<RankedResult> {
        let mut heap: BinaryHeap<(u32, DocId)> = BinaryHeap::with_capacity(k + 1);
        for &slot in slots {
            let d = distance(slot);
            if heap.len() == k {
                // Full heap: only replace the current worst.
                let &(worst_d, worst_id) = heap.peek().expect("heap is non-empty");
                let id = self.store[slot as usize].id;
                if (d, id) < (worst_d, worst_id) {
                    heap.pop();
                    heap.push((d, id));
                }
            } else {
                heap.push((d, self.store[slot as usize].id));
            }
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|(distance, id)| RankedResult { id, distance, score: code_bits - distance })
            .collect()
    }

    fn rank_long(&self, slots: &[u32], query: &LongCode, k: usize) -> Vec<RankedResult> {
        let q = query.words;
        self.rank_slots(slots, k, LONG_BITS, |slot| {
            let d = &self.long_words[slot as usize];
            (q[0] ^ d[0]).count_ones()
                + (q[1] ^ d[1]).count_ones()
                + (q[2] ^ d[2]).count_ones()
                + (q[3] ^ d[3]).count_ones()
        })
    }

    /// Searches with a full 256-bit query code. Every mode accepts a long
    /// query: `Short` and `TwoStage` derive the filtering code with the
    /// index extractor.
    pub fn search(&self, query: &LongCode, k: usize, mode: SearchMode) -> Result<Vec<RankedResult>> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        match mode {
            SearchMode::TwoStage => {
                let short = self.config.extractor.extract(query);
                let slots = self.filter_slots_short(&short);
                Ok(self.rank_long(&slots, query, k))
            }
            SearchMode::Short => {
                let short = self.config.extractor.extract(query);
                self.search_short(&short, k)
            }
            SearchMode::Long => {
                let slots = self.filter_slots_long(query)?;
                Ok(self.rank_long(&slots, query, k))
            }
        }
    }

    /// `Short`-mode search from a bare 64-bit code: coarse-filter and rank
    /// by 64-bit distance (score out of 64).
    pub fn search_short(&self, query: &ShortCode, k: usize) -> Result<Vec<RankedResult>> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        let slots = self.filter_slots_short(query);
        let q = query.as_u64();
        Ok(self.rank_slots(&slots, k, SHORT_BITS, |slot| {
            (q ^ self.short_words[slot as usize]).count_ones()
        }))
    }

    /// Re-ranks an explicit candidate set by exact 256-bit distance,
    /// returning the top `k` by `(distance, id)`. Candidates are treated as
    /// a set (duplicates collapse); an id absent from the index is an error.
    pub fn rerank(&self, candidates: &[DocId], query: &LongCode, k: usize) -> Result<Vec<RankedResult>> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        let mut slots = Vec::with_capacity(candidates.len());
        for &id in candidates {
            slots.push(self.slot_of(id).ok_or(Error::UnknownDocId(id))?);
        }
        slots.sort_unstable();
        slots.dedup();
        Ok(self.rank_long(&slots, query, k))
    }
}
