//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hamsearch::SearchMode;

#[derive(Parser, Debug)]
#[command(
    name = "hamsearch",
    version,
    about = "Two-stage similarity search over 256-bit binary codes",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a labeled synthetic corpus of 256-bit codes.
    Synth(SynthArgs),
    /// Derive a 64-bit short-code extractor from a corpus via correlation
    /// partitioning.
    Partition(PartitionArgs),
    /// Build a search index from a codes file and save it.
    Build(BuildArgs),
    /// Search a saved index for one code.
    Query(QueryArgs),
    /// Measure retrieval quality (mean average precision) per mode.
    Eval(EvalArgs),
    /// Measure per-query search latency per mode.
    Bench(BenchArgs),
    /// Emit search-engine deployment artifacts (script, mappings,
    /// neighbor docs, code docs, query bodies).
    ExportEs(ExportEsArgs),
    /// Run the HTTP search service.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of label classes.
    #[arg(long, default_value_t = 100)]
    pub classes: usize,
    /// Codes generated per class.
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    /// Per-bit flip probability from class centroid to member, in [0, 0.5).
    #[arg(long, default_value_t = 0.05)]
    pub flip_p: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output codes file (tab-separated: id, hex code, labels).
    #[arg(long)]
    pub out: PathBuf,
    /// Held-out query codes generated per class.
    #[arg(long, default_value_t = 0, requires = "queries_out")]
    pub queries_per_class: usize,
    /// Output codes file for the held-out queries.
    #[arg(long, requires = "queries_per_class")]
    pub queries_out: Option<PathBuf>,
    /// Arrange classes under this many superclasses (closer centroids
    /// within a superclass), for corpora with near-miss structure.
    #[arg(long)]
    pub superclasses: Option<usize>,
    /// Per-bit flip probability from superclass centroid to class centroid.
    #[arg(long, default_value_t = 0.1, requires = "superclasses")]
    pub super_flip_p: f64,
    /// Minimum labels per code (the first is always the code's own class).
    #[arg(long, default_value_t = 1)]
    pub labels_min: usize,
    /// Maximum labels per code.
    #[arg(long, default_value_t = 1)]
    pub labels_max: usize,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    /// Input codes file to sample bit correlations from.
    #[arg(long)]
    pub codes: PathBuf,
    /// Output extractor file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Use at most this many codes from the input (default: all).
    #[arg(long)]
    pub sample: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Input codes file.
    #[arg(long)]
    pub codes: PathBuf,
    /// Output index file.
    #[arg(long)]
    pub out: PathBuf,
    /// Extractor file from `partition` (default: the first 16 bits of each
    /// 64-bit word).
    #[arg(long)]
    pub extractor: Option<PathBuf>,
    /// Hamming-ball radius of the coarse filter (0..=16).
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    /// Mode used when a query does not specify one: short, long, twostage.
    #[arg(long, default_value = "twostage")]
    pub default_mode: SearchMode,
    /// Skip the sixteen long-code posting fields; disables long mode but
    /// roughly quarters posting memory.
    #[arg(long)]
    pub no_long_postings: bool,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// Index file from `build`.
    #[arg(long)]
    pub index: PathBuf,
    /// Query code as hex: 64 chars (256-bit) for any mode, 16 chars
    /// (64-bit) for short mode only.
    #[arg(long)]
    pub code: String,
    /// Number of results.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// short, long, or twostage (default: the index's default mode).
    #[arg(long)]
    pub mode: Option<SearchMode>,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Index file from `build`.
    #[arg(long)]
    pub index: PathBuf,
    /// Labeled query codes file.
    #[arg(long)]
    pub queries: PathBuf,
    /// Comma-separated modes to evaluate.
    #[arg(long, default_value = "long,twostage,short")]
    pub modes: String,
    /// Comma-separated result-list cutoffs (default: the standard ladder).
    #[arg(long)]
    pub k: Option<String>,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Index file from `build`.
    #[arg(long)]
    pub index: PathBuf,
    /// Query codes file (labels ignored).
    #[arg(long)]
    pub queries: PathBuf,
    /// Comma-separated modes to measure.
    #[arg(long, default_value = "short,twostage,long")]
    pub modes: String,
    /// Comma-separated result-list cutoffs.
    #[arg(long, default_value = "10,100,1000")]
    pub k: String,
    /// Leading queries measured but discarded, per (mode, k) cell.
    #[arg(long, default_value_t = 50)]
    pub warmup: usize,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ExportEsArgs {
    /// Directory to write artifacts into (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Hamming-ball radius of the neighbor expansion.
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    /// Emit one retrieval document per record of this codes file.
    #[arg(long, conflicts_with = "index")]
    pub codes: Option<PathBuf>,
    /// Extractor used to derive filter fields for --codes / --query
    /// (default: the first 16 bits of each word).
    #[arg(long, conflicts_with = "index")]
    pub extractor: Option<PathBuf>,
    /// Take documents and the extractor from a saved index instead.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Also emit a ready-to-send search body for this 64-char hex code.
    #[arg(long)]
    pub query: Option<String>,
    /// Result count inside the emitted search body.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Listen address, e.g. 127.0.0.1:7700 (port 0 picks a free port).
    #[arg(long)]
    pub listen: Option<String>,
    /// Index file to serve; loaded at startup.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Start empty with this extractor instead of loading an index.
    #[arg(long)]
    pub extractor: Option<PathBuf>,
    /// Coarse-filter radius when starting empty.
    #[arg(long)]
    pub radius: Option<u32>,
    /// Default search mode override.
    #[arg(long)]
    pub mode: Option<SearchMode>,
    /// Default result count.
    #[arg(long)]
    pub k: Option<usize>,
    /// key=value config file (keys: listen, index, extractor, radius,
    /// mode, k). Flags override environment, environment overrides file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
