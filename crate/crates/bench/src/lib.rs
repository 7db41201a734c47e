//! Shared fixtures for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hamsearch::codes_file::to_documents;
use hamsearch::eval::{generate_synthetic, SyntheticConfig};
use hamsearch::{IndexConfig, LongCode, SearchIndex, ShortCode, ShortCodeExtractor};

/// Uniform random 256-bit codes — the worst case for the coarse filter,
/// since unrelated subcodes rarely land within the expansion radius.
pub fn random_long_codes(count: usize, seed: u64) -> Vec<LongCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| LongCode::new([rng.random(), rng.random(), rng.random(), rng.random()]))
        .collect()
}

/// Uniform random 64-bit codes.
pub fn random_short_codes(count: usize, seed: u64) -> Vec<ShortCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ShortCode::new([rng.random(), rng.random(), rng.random(), rng.random()]))
        .collect()
}

/// A clustered index of `classes * per_class` documents plus query codes
/// drawn from the same class distribution — mirroring live traffic, where
/// most queries do have true near neighbors in the corpus.
pub fn clustered_index(
    classes: usize,
    per_class: usize,
    queries_per_class: usize,
    seed: u64,
) -> (SearchIndex, Vec<LongCode>) {
    let mut config = SyntheticConfig::new(classes, per_class, 0.05, seed);
    config.queries_per_class = queries_per_class;
    let (records, queries) = generate_synthetic(&config).expect("valid synthetic config");
    let extractor = ShortCodeExtractor::sequential();
    let index_config = IndexConfig::new(2, extractor.clone()).expect("valid radius");
    let mut index = SearchIndex::new(index_config).expect("fresh index");
    index
        .index_documents(to_documents(&records, &extractor))
        .expect("synthetic ids are unique");
    (index, queries.into_iter().map(|query| query.long_code).collect())
}
