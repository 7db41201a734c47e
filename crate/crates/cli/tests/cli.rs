//! End-to-end tests driving the compiled `hamsearch` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hamsearch"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed with {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Generates a small corpus and builds an index in `dir`, returning the
/// corpus, queries, extractor, and index paths.
fn build_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let corpus = dir.join("corpus.codes");
    let queries = dir.join("queries.codes");
    let extractor = dir.join("extractor.txt");
    let index = dir.join("index.bin");
    stdout_of(&run(&[
        "synth",
        "--classes", "10",
        "--per-class", "20",
        "--flip-p", "0.05",
        "--seed", "11",
        "--out", path_str(&corpus),
        "--queries-per-class", "2",
        "--queries-out", path_str(&queries),
    ]));
    stdout_of(&run(&[
        "partition",
        "--codes", path_str(&corpus),
        "--out", path_str(&extractor),
    ]));
    stdout_of(&run(&[
        "build",
        "--codes", path_str(&corpus),
        "--extractor", path_str(&extractor),
        "--out", path_str(&index),
    ]));
    (corpus, queries, extractor, index)
}

fn first_record(corpus: &Path) -> (u64, String) {
    let text = fs::read_to_string(corpus).unwrap();
    let line = text.lines().next().unwrap();
    let mut fields = line.split('\t');
    let id = fields.next().unwrap().parse().unwrap();
    let hex = fields.next().unwrap().to_string();
    (id, hex)
}

#[test]
fn pipeline_synth_partition_build_query() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _, _, index) = build_fixture(dir.path());
    let (id, hex) = first_record(&corpus);

    let output = stdout_of(&run(&[
        "query",
        "--index", path_str(&index),
        "--code", &hex,
        "--k", "5",
        "--json",
    ]));
    let body: serde_json::Value = serde_json::from_str(&output).unwrap();
    assert_eq!(body["mode"], "twostage");
    assert_eq!(body["results"][0]["id"], id);
    assert_eq!(body["results"][0]["distance"], 0);
    assert_eq!(body["results"][0]["score"], 256);
    assert_eq!(body["count"].as_u64().unwrap(), 5);

    // Text output renders a rank table with labels.
    let text = stdout_of(&run(&[
        "query",
        "--index", path_str(&index),
        "--code", &hex,
        "--k", "3",
    ]));
    assert!(text.contains("rank"));
    assert!(text.contains("c0"));
}

#[test]
fn eval_and_bench_render_tables_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (_, queries, _, index) = build_fixture(dir.path());

    let table = stdout_of(&run(&[
        "eval",
        "--index", path_str(&index),
        "--queries", path_str(&queries),
        "--k", "5,10",
    ]));
    assert!(table.contains("mean average precision"));
    for mode in ["long", "twostage", "short"] {
        assert!(table.contains(mode), "missing {mode} in:\n{table}");
    }

    let json = stdout_of(&run(&[
        "eval",
        "--index", path_str(&index),
        "--queries", path_str(&queries),
        "--k", "5",
        "--modes", "twostage",
        "--json",
    ]));
    let body: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(body["k_values"], serde_json::json!([5]));
    assert_eq!(body["rows"][0]["mode"], "twostage");
    let map = body["rows"][0]["map_percent"][0].as_f64().unwrap();
    assert!((0.0..=100.0).contains(&map));

    let bench = stdout_of(&run(&[
        "bench",
        "--index", path_str(&index),
        "--queries", path_str(&queries),
        "--k", "5",
        "--warmup", "2",
    ]));
    assert!(bench.contains("per-query latency"));
    assert!(bench.contains("μ"));
}

#[test]
fn export_es_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _, extractor, _) = build_fixture(dir.path());
    let out_dir = dir.path().join("es");
    let (_, hex) = first_record(&corpus);
    stdout_of(&run(&[
        "export-es",
        "--out-dir", path_str(&out_dir),
        "--radius", "1",
        "--codes", path_str(&corpus),
        "--extractor", path_str(&extractor),
        "--query", &hex,
        "--k", "7",
    ]));

    let script = fs::read_to_string(out_dir.join("script.json")).unwrap();
    assert!(script.contains("64-Long.bitCount(params.subcode^doc[params.field].value)"));
    let mappings = fs::read_to_string(out_dir.join("mappings.json")).unwrap();
    assert!(mappings.contains("\"f_0\"") && mappings.contains("\"r_3\""));

    let neighbors = fs::read_to_string(out_dir.join("neighbors-d1.ndjson")).unwrap();
    assert_eq!(neighbors.lines().count(), 65_536);
    // Radius 1 over 16 bits: each ball holds the value itself plus 16.
    let first: serde_json::Value = serde_json::from_str(neighbors.lines().next().unwrap()).unwrap();
    assert_eq!(first["body"]["nbs"].as_array().unwrap().len(), 17);

    let docs = fs::read_to_string(out_dir.join("docs.ndjson")).unwrap();
    assert_eq!(docs.lines().count(), 200);

    let query: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("query.json")).unwrap()).unwrap();
    assert_eq!(query["size"], 7);
    assert_eq!(
        query["query"]["function_score"]["functions"].as_array().unwrap().len(),
        4
    );
}

#[test]
fn short_code_queries_require_short_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _, _, index) = build_fixture(dir.path());
    let (_, hex) = first_record(&corpus);
    let short_hex = &hex[..16];

    // Default mode is twostage: a 16-char code is an input contradiction.
    let output = run(&["query", "--index", path_str(&index), "--code", short_hex]);
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).contains("short"));

    // Explicit short mode works. The queried prefix is not the extractor's
    // short code, so only shape is asserted, not contents.
    let output = run(&[
        "query",
        "--index", path_str(&index),
        "--code", short_hex,
        "--mode", "short",
        "--json",
    ]);
    assert!(output.status.success());
}

#[test]
fn exit_codes_distinguish_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.codes");
    let out = dir.path().join("out.bin");

    // 3: file system problems.
    let output = run(&["build", "--codes", path_str(&missing), "--out", path_str(&out)]);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    // 4: malformed input files.
    let malformed = dir.path().join("malformed.codes");
    fs::write(&malformed, "1\tnot-hex-at-all\n").unwrap();
    let output = run(&["build", "--codes", path_str(&malformed), "--out", path_str(&out)]);
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 1"));

    // 6: operations conflicting with index state (duplicate ids).
    let duplicated = dir.path().join("dup.codes");
    let code_a = "00".repeat(32);
    let code_b = "11".repeat(32);
    fs::write(&duplicated, format!("7\t{code_a}\n7\t{code_b}\n")).unwrap();
    let output = run(&["build", "--codes", path_str(&duplicated), "--out", path_str(&out)]);
    assert_eq!(output.status.code(), Some(6));

    // 5: unreadable index files.
    let garbage = dir.path().join("garbage.bin");
    fs::write(&garbage, b"not an index file at all").unwrap();
    let output = run(&["query", "--index", path_str(&garbage), "--code", &code_a]);
    assert_eq!(output.status.code(), Some(5));

    // 5 again: a real index with one corrupted byte.
    let (_, _, _, index) = build_fixture(dir.path());
    let mut bytes = fs::read(&index).unwrap();
    let middle = bytes.len() / 2;
    bytes[middle] ^= 0x01;
    let corrupted = dir.path().join("corrupted.bin");
    fs::write(&corrupted, &bytes).unwrap();
    let output = run(&["query", "--index", path_str(&corrupted), "--code", &code_a]);
    assert_eq!(output.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&output.stderr).contains("checksum"));

    // 2: usage errors come straight from argument parsing.
    let output = run(&["query", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn long_mode_refused_without_long_postings() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.codes");
    let index = dir.path().join("lean.bin");
    stdout_of(&run(&[
        "synth",
        "--classes", "3",
        "--per-class", "5",
        "--out", path_str(&corpus),
    ]));
    stdout_of(&run(&[
        "build",
        "--codes", path_str(&corpus),
        "--out", path_str(&index),
        "--no-long-postings",
    ]));
    let (_, hex) = first_record(&corpus);
    let output = run(&[
        "query",
        "--index", path_str(&index),
        "--code", &hex,
        "--mode", "long",
    ]);
    assert_eq!(output.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&output.stderr).contains("long"));

    // The same index still serves the other modes.
    let output = run(&["query", "--index", path_str(&index), "--code", &hex]);
    assert!(output.status.success());
}

#[test]
fn synth_validates_flip_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.codes");
    let output = run(&[
        "synth",
        "--classes", "2",
        "--per-class", "2",
        "--flip-p", "0.75",
        "--out", path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).contains("0.75"));
}
