//! Retrieval-quality and latency harnesses, plus a labeled synthetic corpus
//! generator for exercising them without a trained encoder.
//!
//! Quality is measured as mean average precision over labeled queries: a
//! retrieved document is relevant when it shares at least one label with
//! the query. Average precision at cutoff `N` is normalized by the number
//! of relevant documents *within the returned top-N*, so a query scores 1.0
//! exactly when every relevant result is ranked ahead of every irrelevant
//! one.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{LongCode, LONG_BITS};
use crate::codes_file::CodeRecord;
use crate::error::{Error, Result};
use crate::index::{DocId, SearchIndex, SearchMode};

/// The cutoff ladder used by the standard quality/latency tables.
pub const TABLE_K_VALUES: &[usize] = &[10, 25, 50, 100, 250, 500, 1000];

/// A labeled evaluation query. When `id` is set and the same id exists in
/// the index, that document is excluded from the query's own ranking (the
/// query retrieving itself carries no information).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledQuery {
    pub id: Option<DocId>,
    pub long_code: LongCode,
    pub labels: Vec<String>,
}

/// Converts codes-file records into evaluation queries. Every record must
/// carry at least one label.
pub fn queries_from_records(records: &[CodeRecord]) -> Result<Vec<LabeledQuery>> {
    records
        .iter()
        .map(|record| {
            if record.labels.is_empty() {
                return Err(Error::UnlabeledQuery(record.id));
            }
            Ok(LabeledQuery {
                id: Some(record.id),
                long_code: record.long_code,
                labels: record.labels.clone(),
            })
        })
        .collect()
}

/// Average precision of a ranked list at cutoff `n`.
///
/// Only the first `n` entries are considered. The sum of precisions at
/// relevant ranks is divided by the number of relevant entries *inside the
/// cutoff*; a list with no relevant entry in the top `n` scores 0.
pub fn average_precision(
    ranked: &[DocId],
    mut relevant: impl FnMut(DocId) -> bool,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidTopN);
    }
    let mut relevant_seen = 0u64;
    let mut precision_sum = 0.0;
    for (index, &id) in ranked.iter().take(n).enumerate() {
        if relevant(id) {
            relevant_seen += 1;
            precision_sum += relevant_seen as f64 / (index + 1) as f64;
        }
    }
    if relevant_seen == 0 {
        Ok(0.0)
    } else {
        Ok(precision_sum / relevant_seen as f64)
    }
}

/// One mode's mAP row across the cutoff ladder, in percent.
#[derive(Clone, Debug, Serialize)]
pub struct EvalRow {
    pub mode: SearchMode,
    pub map_percent: Vec<f64>,
}

/// Mean-average-precision results for one or more modes over a shared
/// cutoff ladder.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub k_values: Vec<usize>,
    pub queries: usize,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Appends another report's rows; the cutoff ladders must match.
    pub fn merge(&mut self, other: EvalReport) {
        assert_eq!(self.k_values, other.k_values, "reports use different cutoffs");
        self.rows.extend(other.rows);
    }

    /// Renders the report as an aligned text table (values in percent).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mean average precision (%) over {} queries", self.queries);
        let _ = write!(out, "{:<10}", "top k");
        for k in &self.k_values {
            let _ = write!(out, "{k:>9}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<10}", row.mode.to_string());
            for value in &row.map_percent {
                let _ = write!(out, "{value:>9.2}");
            }
            out.push('\n');
        }
        out
    }
}

/// Computes mean average precision for `mode` at every cutoff in
/// `k_values`. Relevance is label overlap between query and document.
/// Queries run in parallel; per-query results are reduced in input order,
/// so the outcome is deterministic and permutation-stable up to float
/// rounding.
pub fn mean_ap(
    index: &SearchIndex,
    queries: &[LabeledQuery],
    mode: SearchMode,
    k_values: &[usize],
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(Error::InvalidTopN);
    }
    if !index.records().iter().any(|record| !record.labels.is_empty()) {
        return Err(Error::NoLabeledDocuments);
    }
    for query in queries {
        if query.labels.is_empty() {
            return Err(Error::UnlabeledQuery(query.id.unwrap_or_default()));
        }
    }
    let k_max = *k_values.iter().max().expect("non-empty cutoffs");

    let per_query: Vec<Vec<f64>> = queries
        .par_iter()
        .map(|query| -> Result<Vec<f64>> {
            // Fetch one extra result when the query may match itself.
            let fetch = k_max + usize::from(query.id.is_some());
            let results = index.search(&query.long_code, fetch, mode)?;
            let ranked: Vec<DocId> = results
                .iter()
                .map(|result| result.id)
                .filter(|&id| Some(id) != query.id)
                .collect();
            let query_labels: HashSet<&str> = query.labels.iter().map(String::as_str).collect();
            let relevant = |id: DocId| {
                index
                    .get(id)
                    .is_some_and(|record| {
                        record.labels.iter().any(|label| query_labels.contains(label.as_str()))
                    })
            };
            k_values
                .iter()
                .map(|&k| average_precision(&ranked, relevant, k))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let map_percent: Vec<f64> = (0..k_values.len())
        .map(|column| {
            let sum: f64 = per_query.iter().map(|row| row[column]).sum();
            100.0 * sum / per_query.len() as f64
        })
        .collect();

    Ok(EvalReport {
        k_values: k_values.to_vec(),
        queries: queries.len(),
        rows: vec![EvalRow { mode, map_percent }],
    })
}

/// Optional second hierarchy level for the synthetic corpus: class
/// centroids are themselves sampled around superclass centroids, so
/// different classes of one superclass sit closer together than classes of
/// different superclasses. This produces near-miss neighbors, which keeps
/// retrieval quality sensitive to code width.
#[derive(Clone, Copy, Debug)]
pub struct SuperclassConfig {
    /// Number of superclasses; classes are assigned round-robin.
    pub count: usize,
    /// Per-bit flip probability from superclass centroid to class centroid.
    pub centroid_flip_probability: f64,
}

/// Configuration of the synthetic labeled corpus.
#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub num_classes: usize,
    pub codes_per_class: usize,
    /// Extra held-out members generated per class as evaluation queries.
    pub queries_per_class: usize,
    /// Per-bit flip probability from class centroid to member.
    pub centroid_flip_probability: f64,
    /// Inclusive range for how many labels each code carries. The first
    /// label is always the code's own class; extras are distinct other
    /// classes.
    pub labels_per_code: (usize, usize),
    pub superclasses: Option<SuperclassConfig>,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(
        num_classes: usize,
        codes_per_class: usize,
        centroid_flip_probability: f64,
        seed: u64,
    ) -> Self {
        Self {
            num_classes,
            codes_per_class,
            queries_per_class: 0,
            centroid_flip_probability,
            labels_per_code: (1, 1),
            superclasses: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.centroid_flip_probability) {
            return Err(Error::InvalidFlipProbability(self.centroid_flip_probability));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidSyntheticConfig("num_classes must be at least 1".into()));
        }
        let (min, max) = self.labels_per_code;
        if min < 1 || min > max || max > self.num_classes {
            return Err(Error::InvalidSyntheticConfig(format!(
                "labels_per_code range ({min}, {max}) must satisfy 1 <= min <= max <= num_classes"
            )));
        }
        if let Some(supers) = &self.superclasses {
            if supers.count == 0 {
                return Err(Error::InvalidSyntheticConfig("superclass count must be at least 1".into()));
            }
            if !(0.0..0.5).contains(&supers.centroid_flip_probability) {
                return Err(Error::InvalidFlipProbability(supers.centroid_flip_probability));
            }
        }
        Ok(())
    }
}

/// The label string for a class index.
pub fn class_label(class: usize) -> String {
    format!("c{class}")
}

/// A reusable "flip a binomial number of distinct random bits" sampler.
/// Drawing the flip count from Binomial(256, p) and then choosing that many
/// distinct positions is distributed identically to 256 independent
/// per-bit coin flips, but costs O(flips) instead of O(256) per code.
struct Flipper {
    distribution: Option<Binomial>,
    positions: [u16; LONG_BITS as usize],
}

impl Flipper {
    fn new(p: f64) -> Self {
        let distribution =
            (p > 0.0).then(|| Binomial::new(u64::from(LONG_BITS), p).expect("validated probability"));
        Self { distribution, positions: std::array::from_fn(|i| i as u16) }
    }

    fn flip(&mut self, mut code: LongCode, rng: &mut ChaCha8Rng) -> LongCode {
        let Some(distribution) = &self.distribution else {
            return code;
        };
        let flips = distribution.sample(rng) as usize;
        // Partial Fisher-Yates: the array stays a permutation of 0..256
        // across calls, which keeps every prefix draw uniform.
        for i in 0..flips {
            let j = rng.random_range(i..self.positions.len());
            self.positions.swap(i, j);
            code.flip_bit(u32::from(self.positions[i]));
        }
        code
    }
}

fn random_code(rng: &mut ChaCha8Rng) -> LongCode {
    LongCode::new([rng.random(), rng.random(), rng.random(), rng.random()])
}

fn draw_labels(own_class: usize, config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Vec<String> {
    let (min, max) = config.labels_per_code;
    let total = rng.random_range(min..=max);
    let mut classes = vec![own_class];
    while classes.len() < total {
        let candidate = rng.random_range(0..config.num_classes);
        if !classes.contains(&candidate) {
            classes.push(candidate);
        }
    }
    classes.into_iter().map(class_label).collect()
}

/// Generates a labeled synthetic corpus plus held-out queries.
///
/// Each class gets a centroid (random, or derived from a superclass
/// centroid when a hierarchy is configured); members and queries flip each
/// centroid bit independently with the configured probability. Documents
/// get ids `0..total_docs`; queries continue the id range so the two sets
/// never collide. Deterministic in the seed.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(Vec<CodeRecord>, Vec<LabeledQuery>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut member_flipper = Flipper::new(config.centroid_flip_probability);

    let centroids: Vec<LongCode> = match &config.superclasses {
        None => (0..config.num_classes).map(|_| random_code(&mut rng)).collect(),
        Some(supers) => {
            let mut class_flipper = Flipper::new(supers.centroid_flip_probability);
            let super_centroids: Vec<LongCode> =
                (0..supers.count).map(|_| random_code(&mut rng)).collect();
            (0..config.num_classes)
                .map(|class| class_flipper.flip(super_centroids[class % supers.count], &mut rng))
                .collect()
        }
    };

    let mut next_id: DocId = 0;
    let mut documents = Vec::with_capacity(config.num_classes * config.codes_per_class);
    for (class, centroid) in centroids.iter().enumerate() {
        for _ in 0..config.codes_per_class {
            documents.push(CodeRecord {
                id: next_id,
                long_code: member_flipper.flip(*centroid, &mut rng),
                labels: draw_labels(class, config, &mut rng),
            });
            next_id += 1;
        }
    }
    let mut queries = Vec::with_capacity(config.num_classes * config.queries_per_class);
    for (class, centroid) in centroids.iter().enumerate() {
        for _ in 0..config.queries_per_class {
            queries.push(LabeledQuery {
                id: Some(next_id),
                long_code: member_flipper.flip(*centroid, &mut rng),
                labels: draw_labels(class, config, &mut rng),
            });
            next_id += 1;
        }
    }
    Ok((documents, queries))
}

/// Latency summary for one `(mode, k)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct LatencyEntry {
    pub k: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub samples: usize,
}

/// Latency results for one mode across the cutoff ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LatencyStats {
    pub mode: SearchMode,
    pub warmup: usize,
    pub entries: Vec<LatencyEntry>,
}

/// Latency results for several modes over a shared cutoff ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LatencyReport {
    pub stats: Vec<LatencyStats>,
}

impl LatencyReport {
    /// Renders the report as an aligned text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (warmup, samples) = self
            .stats
            .first()
            .and_then(|s| s.entries.first().map(|e| (s.warmup, e.samples)))
            .unwrap_or((0, 0));
        let _ = writeln!(
            out,
            "per-query latency (ms): search call through ranked-list materialization, \
             sequential, {samples} samples per cell after {warmup} warmup queries"
        );
        let k_values: Vec<usize> = self
            .stats
            .first()
            .map(|s| s.entries.iter().map(|e| e.k).collect())
            .unwrap_or_default();
        let _ = write!(out, "{:<10}{:>3}", "top k", "");
        for k in &k_values {
            let _ = write!(out, "{k:>9}");
        }
        out.push('\n');
        for stats in &self.stats {
            let _ = write!(out, "{:<10}{:>3}", stats.mode.to_string(), "μ");
            for entry in &stats.entries {
                let _ = write!(out, "{:>9.3}", entry.mean_ms);
            }
            out.push('\n');
            let _ = write!(out, "{:<10}{:>3}", "", "σ");
            for entry in &stats.entries {
                let _ = write!(out, "{:>9.3}", entry.std_ms);
            }
            out.push('\n');
        }
        out
    }
}

/// Measures per-query search latency for `mode` at each cutoff in
/// `k_values`. Queries run sequentially in the given order; the first
/// `warmup_count` queries of each cell are measured but discarded. Timing
/// spans the search call itself, i.e. filtering through ranked-list
/// materialization. Reports population mean and standard deviation in
/// milliseconds.
pub fn benchmark_latency(
    index: &SearchIndex,
    queries: &[LongCode],
    mode: SearchMode,
    k_values: &[usize],
    warmup_count: usize,
) -> Result<LatencyStats> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    if queries.len() <= warmup_count {
        return Err(Error::NotEnoughQueries { got: queries.len(), warmup: warmup_count });
    }
    let mut entries = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut samples = Vec::with_capacity(queries.len() - warmup_count);
        for (i, query) in queries.iter().enumerate() {
            let start = Instant::now();
            let results = index.search(query, k, mode)?;
            let elapsed = start.elapsed();
            std::hint::black_box(&results);
            if i >= warmup_count {
                samples.push(elapsed.as_secs_f64() * 1e3);
            }
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        entries.push(LatencyEntry {
            k,
            mean_ms: mean,
            std_ms: variance.sqrt(),
            samples: samples.len(),
        });
    }
    Ok(LatencyStats { mode, warmup: warmup_count, entries })
}
