//! Implementations of the non-service subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;

use hamsearch::codes_file::{read_codes_file, to_documents, write_codes_file, CodeRecord};
use hamsearch::es_export::{
    emit_code_doc, emit_mappings, emit_neighbor_doc, emit_script, emit_search_query,
};
use hamsearch::eval::{
    benchmark_latency, generate_synthetic, mean_ap, queries_from_records, LatencyReport,
    SuperclassConfig, SyntheticConfig, TABLE_K_VALUES,
};
use hamsearch::partition::{build_extractor, compute_bit_correlations, cut_weight, partition_bits};
use hamsearch::persist::{load_index, save_index};
use hamsearch::{
    parse_code_hex, IndexConfig, LongCode, ParsedCode, SearchIndex, SearchMode,
    ShortCodeExtractor,
};

use crate::args::{
    BenchArgs, BuildArgs, EvalArgs, ExportEsArgs, PartitionArgs, QueryArgs, SynthArgs,
};
use crate::CliError;

pub fn run_synth(args: &SynthArgs) -> anyhow::Result<()> {
    let mut config = SyntheticConfig::new(args.classes, args.per_class, args.flip_p, args.seed);
    config.queries_per_class = args.queries_per_class;
    config.labels_per_code = (args.labels_min, args.labels_max);
    if let Some(count) = args.superclasses {
        config.superclasses =
            Some(SuperclassConfig { count, centroid_flip_probability: args.super_flip_p });
    }
    let (documents, queries) = generate_synthetic(&config)?;
    write_codes_file(&args.out, &documents)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} documents to {}", documents.len(), args.out.display());
    if let Some(queries_out) = &args.queries_out {
        let records: Vec<CodeRecord> = queries
            .into_iter()
            .map(|query| CodeRecord {
                id: query.id.expect("synthetic queries always carry ids"),
                long_code: query.long_code,
                labels: query.labels,
            })
            .collect();
        write_codes_file(queries_out, &records)
            .with_context(|| format!("writing {}", queries_out.display()))?;
        println!("wrote {} queries to {}", records.len(), queries_out.display());
    }
    Ok(())
}

pub fn run_partition(args: &PartitionArgs) -> anyhow::Result<()> {
    let records = read_codes_file(&args.codes)
        .with_context(|| format!("reading {}", args.codes.display()))?;
    let mut codes: Vec<LongCode> = records.iter().map(|record| record.long_code).collect();
    if let Some(sample) = args.sample {
        codes.truncate(sample);
    }
    let graph = compute_bit_correlations(&codes)?;
    let partition = partition_bits(&graph, args.seed);
    let groups = partition.groups();
    let mut crossing = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            crossing += cut_weight(&graph, &groups[a], &groups[b]);
        }
    }
    let extractor = build_extractor(&partition);
    extractor.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "partitioned 256 bits from {} codes; crossing correlation {crossing:.3}; \
         extractor written to {}",
        codes.len(),
        args.out.display()
    );
    Ok(())
}

fn load_extractor(path: Option<&Path>) -> anyhow::Result<ShortCodeExtractor> {
    match path {
        Some(path) => ShortCodeExtractor::load(path)
            .with_context(|| format!("reading {}", path.display())),
        None => Ok(ShortCodeExtractor::sequential()),
    }
}

pub fn run_build(args: &BuildArgs) -> anyhow::Result<()> {
    let records = read_codes_file(&args.codes)
        .with_context(|| format!("reading {}", args.codes.display()))?;
    let extractor = load_extractor(args.extractor.as_deref())?;
    let documents = to_documents(&records, &extractor);
    let config = IndexConfig::new(args.radius, extractor)?
        .with_default_mode(args.default_mode)
        .with_long_postings(!args.no_long_postings);
    let mut index = SearchIndex::new(config)?;
    index.index_documents(documents)?;
    save_index(&index, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let bytes = fs::metadata(&args.out).map(|m| m.len()).unwrap_or(0);
    println!(
        "indexed {} documents (radius {}, default mode {}, long postings {}); wrote {} bytes to {}",
        index.len(),
        args.radius,
        args.default_mode,
        !args.no_long_postings,
        bytes,
        args.out.display()
    );
    Ok(())
}

pub fn run_query(args: &QueryArgs) -> anyhow::Result<()> {
    let index =
        load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let mode = args.mode.unwrap_or(index.config().default_mode);
    let results = match parse_code_hex(&args.code)? {
        ParsedCode::Long(code) => index.search(&code, args.k, mode)?,
        ParsedCode::Short(short) => {
            if mode != SearchMode::Short {
                return Err(CliError::Input(format!(
                    "a 16-char hex code carries only the 64-bit short code and cannot be \
                     searched in {mode} mode; pass --mode short or a 64-char code"
                ))
                .into());
            }
            index.search_short(&short, args.k)?
        }
    };
    if args.json {
        let rows: Vec<serde_json::Value> = results
            .iter()
            .map(|result| {
                serde_json::json!({
                    "id": result.id,
                    "distance": result.distance,
                    "score": result.score,
                    "labels": index.get(result.id).map(|r| r.labels.clone()).unwrap_or_default(),
                })
            })
            .collect();
        let body = serde_json::json!({
            "mode": mode,
            "k": args.k,
            "count": rows.len(),
            "results": rows,
        });
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        println!("{} results ({mode} mode, k={})", results.len(), args.k);
        println!("{:<6}{:>12}{:>10}{:>8}  {}", "rank", "id", "distance", "score", "labels");
        for (rank, result) in results.iter().enumerate() {
            let labels = index
                .get(result.id)
                .map(|record| record.labels.join(","))
                .unwrap_or_default();
            println!(
                "{:<6}{:>12}{:>10}{:>8}  {labels}",
                rank + 1,
                result.id,
                result.distance,
                result.score
            );
        }
    }
    Ok(())
}

fn parse_modes(text: &str) -> anyhow::Result<Vec<SearchMode>> {
    text.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<SearchMode>()
                .map_err(|err| CliError::Input(format!("--modes: {err}")).into())
        })
        .collect()
}

fn parse_k_list(text: &str) -> anyhow::Result<Vec<usize>> {
    let values: Vec<usize> = text
        .split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<usize>()
                .map_err(|err| CliError::Input(format!("--k: {part:?}: {err}")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Input("--k: expected at least one cutoff".into()).into());
    }
    Ok(values)
}

pub fn run_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let index =
        load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let records = read_codes_file(&args.queries)
        .with_context(|| format!("reading {}", args.queries.display()))?;
    let queries = queries_from_records(&records)?;
    let modes = parse_modes(&args.modes)?;
    if modes.is_empty() {
        return Err(CliError::Input("--modes: expected at least one mode".into()).into());
    }
    let k_values = match &args.k {
        Some(text) => parse_k_list(text)?,
        None => TABLE_K_VALUES.to_vec(),
    };
    let mut report = mean_ap(&index, &queries, modes[0], &k_values)?;
    for &mode in &modes[1..] {
        report.merge(mean_ap(&index, &queries, mode, &k_values)?);
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

pub fn run_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let index =
        load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let records = read_codes_file(&args.queries)
        .with_context(|| format!("reading {}", args.queries.display()))?;
    let codes: Vec<LongCode> = records.iter().map(|record| record.long_code).collect();
    let modes = parse_modes(&args.modes)?;
    if modes.is_empty() {
        return Err(CliError::Input("--modes: expected at least one mode".into()).into());
    }
    let k_values = parse_k_list(&args.k)?;
    let mut report = LatencyReport { stats: Vec::new() };
    for &mode in &modes {
        report.stats.push(benchmark_latency(&index, &codes, mode, &k_values, args.warmup)?);
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn write_artifact_file(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn run_export_es(args: &ExportEsArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    write_artifact_file(&args.out_dir.join("script.json"), &emit_script().body)?;
    write_artifact_file(&args.out_dir.join("mappings.json"), &emit_mappings().body)?;

    let neighbors_path = args.out_dir.join(format!("neighbors-d{}.ndjson", args.radius));
    let file = fs::File::create(&neighbors_path)
        .with_context(|| format!("writing {}", neighbors_path.display()))?;
    let mut out = BufWriter::new(file);
    for value in 0..=u16::MAX {
        let artifact = emit_neighbor_doc(value, args.radius)?;
        out.write_all(artifact.to_ndjson_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    println!("wrote {} (65,536 neighbor documents)", neighbors_path.display());

    // Retrieval documents and the query extractor come either from a saved
    // index or from a codes file plus extractor file.
    let mut doc_source: Option<(Vec<(u64, LongCode, hamsearch::ShortCode)>, ShortCodeExtractor)> =
        None;
    if let Some(index_path) = &args.index {
        let index =
            load_index(index_path).with_context(|| format!("loading {}", index_path.display()))?;
        let docs = index
            .records()
            .iter()
            .map(|record| (record.id, record.long_code, record.short_code))
            .collect();
        doc_source = Some((docs, index.config().extractor.clone()));
    } else if let Some(codes_path) = &args.codes {
        let records = read_codes_file(codes_path)
            .with_context(|| format!("reading {}", codes_path.display()))?;
        let extractor = load_extractor(args.extractor.as_deref())?;
        let docs = records
            .iter()
            .map(|record| (record.id, record.long_code, extractor.extract(&record.long_code)))
            .collect();
        doc_source = Some((docs, extractor));
    }

    if let Some((docs, _)) = &doc_source {
        let docs_path = args.out_dir.join("docs.ndjson");
        let file = fs::File::create(&docs_path)
            .with_context(|| format!("writing {}", docs_path.display()))?;
        let mut out = BufWriter::new(file);
        for (id, long, short) in docs {
            let artifact = emit_code_doc(*id, long, short);
            out.write_all(artifact.to_ndjson_line().as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        println!("wrote {} ({} retrieval documents)", docs_path.display(), docs.len());
    }

    if let Some(query_hex) = &args.query {
        let long = LongCode::parse_hex(query_hex)?;
        let extractor = match &doc_source {
            Some((_, extractor)) => extractor.clone(),
            None => load_extractor(args.extractor.as_deref())?,
        };
        let short = extractor.extract(&long);
        let artifact = emit_search_query(&long, &short, args.k, args.radius)?;
        write_artifact_file(&args.out_dir.join("query.json"), &artifact.body)?;
    }
    Ok(())
}
