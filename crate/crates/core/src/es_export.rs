//! Elasticsearch artifact emission.
//!
//! The in-memory engine has a direct Elasticsearch equivalent: subcode
//! fields with `terms` lookups into a precomputed neighbor index replace
//! the posting maps and neighbor table, and a stored Painless script
//! recomputes `64 - popcount(query_word ^ doc_word)` per word as a
//! `function_score` sum. This module emits those deployment artifacts as
//! JSON bodies paired with the REST path they target, so they can be
//! replayed against a cluster or inspected as files.
//!
//! Signedness: Elasticsearch `long` fields are signed 64-bit integers, so
//! 64-bit code words are serialized as their two's-complement `i64`
//! reinterpretation, both in documents and in script parameters. Neighbor
//! document ids, by contrast, are decimal strings of the unsigned 16-bit
//! value, matching the `terms` lookup `id`.

use serde_json::{json, Map, Value};

use crate::codes::{enumerate_neighbors, LongCode, ShortCode, Subcode16};
use crate::error::{Error, Result};

/// Stored-script id for the per-word Hamming similarity.
pub const HD64_SCRIPT_ID: &str = "hd64";
/// Painless source of the stored script, verbatim.
pub const HD64_SCRIPT_SOURCE: &str = "64-Long.bitCount(params.subcode^doc[params.field].value)";
/// Name of the retrieval index holding the code documents.
pub const RETRIEVAL_INDEX: &str = "es-retrieval";

/// Name of the neighbor-lookup index for radius `d`.
pub fn neighbor_index_name(d: u32) -> String {
    format!("nbs-d{d}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EsArtifactKind {
    /// One `nbs-d<d>` document: the Hamming ball of one subcode value.
    NeighborDoc,
    /// The stored `hd64` script.
    StoredScript,
    /// The `es-retrieval` index mappings.
    Mappings,
    /// One `es-retrieval` document holding a code pair.
    CodeDoc,
    /// A two-stage `function_score` search body.
    SearchQuery,
}

/// A JSON body plus the REST path it would be sent to.
#[derive(Clone, Debug)]
pub struct EsArtifact {
    pub kind: EsArtifactKind,
    /// REST target, e.g. `/nbs-d2/_doc/37` or `/_scripts/hd64`.
    pub target_path: String,
    /// Compact JSON text.
    pub body: String,
}

impl EsArtifact {
    fn new(kind: EsArtifactKind, target_path: String, body: Value) -> Self {
        Self { kind, target_path, body: body.to_string() }
    }

    /// One NDJSON line: `{"path": ..., "body": ...}` with the body embedded
    /// as JSON, not as an escaped string.
    pub fn to_ndjson_line(&self) -> String {
        let path = serde_json::to_string(&self.target_path).expect("strings always serialize");
        format!("{{\"path\":{},\"body\":{}}}", path, self.body)
    }
}

/// Emits the neighbor-lookup document for one subcode value: the sorted
/// Hamming ball of radius `d` around `value`, as unsigned integers. The
/// document id (in the path) is the decimal unsigned value.
pub fn emit_neighbor_doc(value: Subcode16, d: u32) -> Result<EsArtifact> {
    let neighbors = enumerate_neighbors(value, d)?;
    Ok(EsArtifact::new(
        EsArtifactKind::NeighborDoc,
        format!("/{}/_doc/{}", neighbor_index_name(d), value),
        json!({ "nbs": neighbors }),
    ))
}

/// Emits the stored scoring script.
pub fn emit_script() -> EsArtifact {
    EsArtifact::new(
        EsArtifactKind::StoredScript,
        format!("/_scripts/{HD64_SCRIPT_ID}"),
        json!({
            "script": {
                "lang": "painless",
                "source": HD64_SCRIPT_SOURCE,
            }
        }),
    )
}

/// Emits the retrieval index mappings: four `keyword` filter fields
/// `f_0..f_3` (hex subcode terms) and four `long` re-rank fields `r_0..r_3`
/// (signed two's-complement words of the 256-bit code).
pub fn emit_mappings() -> EsArtifact {
    let mut properties = Map::new();
    for j in 0..4 {
        properties.insert(format!("f_{j}"), json!({ "type": "keyword" }));
    }
    for i in 0..4 {
        properties.insert(format!("r_{i}"), json!({ "type": "long" }));
    }
    EsArtifact::new(
        EsArtifactKind::Mappings,
        format!("/{RETRIEVAL_INDEX}"),
        json!({ "mappings": { "properties": properties } }),
    )
}

/// Emits one retrieval document for the `es-retrieval` index: filter
/// subcodes as 4-hex-character terms and code words as signed longs.
pub fn emit_code_doc(id: u64, long_code: &LongCode, short_code: &ShortCode) -> EsArtifact {
    let mut fields = Map::new();
    for (j, &subcode) in short_code.subcodes.iter().enumerate() {
        fields.insert(format!("f_{j}"), json!(format!("{subcode:04x}")));
    }
    for (i, &word) in long_code.words.iter().enumerate() {
        fields.insert(format!("r_{i}"), json!(word as i64));
    }
    EsArtifact::new(
        EsArtifactKind::CodeDoc,
        format!("/{RETRIEVAL_INDEX}/_doc/{id}"),
        Value::Object(fields),
    )
}

/// Emits the two-stage search body for a query: a `constant_score` boost-0
/// filter that `terms`-looks-up each query subcode's neighbor list, summed
/// with four `script_score` functions that add `64 - popcount` per word.
/// Hits therefore rank purely by `256 - hamming256`, exactly like the
/// in-memory `TwoStage` mode.
pub fn emit_search_query(
    query_long: &LongCode,
    query_short: &ShortCode,
    k: usize,
    d: u32,
) -> Result<EsArtifact> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    // Validate the radius the same way the neighbor index build would.
    crate::codes::hamming_ball_size(d)?;

    let functions: Vec<Value> = (0..4)
        .map(|i| {
            json!({
                "script_score": {
                    "script": {
                        "id": HD64_SCRIPT_ID,
                        "params": {
                            "field": format!("r_{i}"),
                            "subcode": query_long.words[i] as i64,
                        }
                    }
                },
                "weight": 1
            })
        })
        .collect();

    let should: Vec<Value> = (0..4)
        .map(|j| {
            let mut terms = Map::new();
            terms.insert(
                format!("f_{j}"),
                json!({
                    "id": query_short.subcodes[j].to_string(),
                    "index": neighbor_index_name(d),
                    "path": "nbs",
                }),
            );
            Value::Object([("terms".to_string(), Value::Object(terms))].into_iter().collect())
        })
        .collect();

    let body = json!({
        "size": k,
        "query": {
            "function_score": {
                "boost_mode": "sum",
                "score_mode": "sum",
                "functions": functions,
                "query": {
                    "constant_score": {
                        "boost": 0.0,
                        "filter": {
                            "bool": {
                                "minimum_should_match": 1,
                                "should": should,
                            }
                        }
                    }
                }
            }
        }
    });
    Ok(EsArtifact::new(
        EsArtifactKind::SearchQuery,
        format!("/{RETRIEVAL_INDEX}/_search"),
        body,
    ))
}

/// Iterates the full deployment set for radius `d`: the stored script, the
/// retrieval mappings, then one neighbor document per 16-bit value
/// (65,538 artifacts in total).
pub fn emit_deployment(d: u32) -> Result<impl Iterator<Item = EsArtifact>> {
    // Surface a bad radius before the iterator is consumed.
    crate::codes::hamming_ball_size(d)?;
    let docs = (0..=u16::MAX).map(move |value| {
        emit_neighbor_doc(value, d).expect("radius was validated above")
    });
    Ok([emit_script(), emit_mappings()].into_iter().chain(docs))
}
