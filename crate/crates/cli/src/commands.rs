//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use rbc_core::barcode::Barcode;
use rbc_core::irma::{BranchTable, IrmaCode};
use rbc_core::radon::ProjectionSet;
use rbc_core::{Index, IndexEntry, LshConfig};

use crate::bench::{self, SearchMode};
use crate::cli::{BenchArgs, Cli, Command, EncodeArgs, IndexArgs, ModeArg, QueryArgs, SynthArgs};
use crate::manifest::read_manifest;
use crate::pipeline::{encode_image_file, EncodeParams};
use crate::report::{BenchmarkReport, LshReport};
use crate::synth;
use crate::UsageError;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Index(args) => cmd_index(args),
        Command::Query(args) => cmd_query(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Plain PBM bitmap, one row per projection angle.
fn pbm_text(barcode: &Barcode) -> String {
    let bins = barcode.len() / barcode.num_angles();
    let mut out = format!("P1\n{bins} {}\n", barcode.num_angles());
    for a in 0..barcode.num_angles() {
        for i in 0..bins {
            out.push(if barcode.bit(a * bins + i) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// One CSV line per angle: degrees first, then every bin value.
fn projections_csv(projections: &ProjectionSet) -> String {
    let mut out = String::new();
    for (angle, row) in projections.angles_deg().iter().zip(projections.rows()) {
        out.push_str(&angle.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

fn cmd_encode(args: EncodeArgs) -> anyhow::Result<()> {
    let params =
        EncodeParams::resolve_cli(args.encoder.kind(), args.angles, args.size, args.window)?;
    let (_, projections, barcode) = encode_image_file(&args.image, params)?;
    if let Some(path) = &args.pbm {
        fs::write(path, pbm_text(&barcode))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.dump_projections {
        fs::write(path, projections_csv(&projections))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    print!("{barcode}");
    Ok(())
}

fn branches_sidecar(index_path: &Path) -> PathBuf {
    let mut os = index_path.as_os_str().to_os_string();
    os.push(".branches");
    PathBuf::from(os)
}

fn cmd_index(args: IndexArgs) -> anyhow::Result<()> {
    let params =
        EncodeParams::resolve_cli(args.encoder.kind(), args.angles, args.size, args.window)?;
    let rows = read_manifest(&args.manifest)?;
    let pool = bench::thread_pool()?;
    let results: Vec<anyhow::Result<IndexEntry>> = pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let (_, _, barcode) = encode_image_file(&row.path, params)?;
                Ok(IndexEntry {
                    id: row.id.clone(),
                    barcode,
                    code: row.code.clone(),
                    image_ref: Some(row.path.clone()),
                })
            })
            .collect()
    });
    let mut entries = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        entries.push(result.with_context(|| format!("manifest row {}", i + 1))?);
    }

    let bits = entries[0].barcode.len();
    let index = if args.lsh {
        let cfg = LshConfig {
            num_tables: args.tables,
            key_size: args
                .key_size
                .unwrap_or_else(|| LshConfig::default_key_size(bits)),
            seed: args.seed,
        };
        Index::build_lsh(entries, cfg)?
    } else {
        Index::build_linear(entries)?
    };
    index
        .save(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;

    let codes: Vec<IrmaCode> = index.entries().iter().map(|e| e.code.clone()).collect();
    let table = BranchTable::build(&codes)?;
    let sidecar = branches_sidecar(&args.out);
    fs::write(&sidecar, table.to_text())
        .with_context(|| format!("cannot write {}", sidecar.display()))?;

    println!(
        "indexed {} images into {} ({}, {} angles, side {}, window {}, {} bits)",
        index.len(),
        args.out.display(),
        index.encoder(),
        index.num_angles(),
        index.image_side(),
        index.smoothing_window(),
        bits
    );
    if let Some(cfg) = index.lsh_config() {
        println!(
            "lsh: {} tables, key size {}, seed {}",
            cfg.num_tables, cfg.key_size, cfg.seed
        );
    }
    println!("branch table: {}", sidecar.display());
    Ok(())
}

/// The index configuration is authoritative; flags only assert it.
fn check_overrides(index: &Index, args: &QueryArgs) -> anyhow::Result<()> {
    if let Some(enc) = args.encoder {
        if enc.kind() != index.encoder() {
            bail!(
                "index was built with the {} encoder, not {}",
                index.encoder(),
                enc.kind()
            );
        }
    }
    if let Some(a) = args.angles {
        if a != index.num_angles() {
            bail!("index was built with {} angles, not {a}", index.num_angles());
        }
    }
    if let Some(s) = args.size {
        if s != index.image_side() {
            bail!("index was built with side {}, not {s}", index.image_side());
        }
    }
    if let Some(w) = args.window {
        if w != index.smoothing_window() {
            bail!(
                "index was built with smoothing window {}, not {w}",
                index.smoothing_window()
            );
        }
    }
    Ok(())
}

fn print_hits(index: &Index, hits: &[(String, usize)]) {
    println!("rank,id,distance,irma_code");
    for (rank, (id, dist)) in hits.iter().enumerate() {
        let code = &index.entry(id).expect("hit comes from the index").code;
        println!("{},{id},{dist},{code}", rank + 1);
    }
}

fn cmd_query(args: QueryArgs) -> anyhow::Result<()> {
    let index = Index::load(&args.index)
        .with_context(|| format!("cannot load index {}", args.index.display()))?;
    check_overrides(&index, &args)?;
    let params = EncodeParams::of_index(&index);
    let (square, _, barcode) = encode_image_file(&args.image, params)?;

    if args.lsh {
        let candidates = index.lsh_candidates(&barcode, args.top)?;
        if args.rerank {
            if candidates.is_empty() {
                bail!("no LSH candidates collided with this query; nothing to re-rank");
            }
            let winner = index.rerank_correlation(&candidates, &square)?;
            let code = &index.entry(&winner).expect("winner comes from the index").code;
            println!("id,irma_code");
            println!("{winner},{code}");
        } else {
            print_hits(&index, &candidates);
        }
    } else {
        let hits = index.knn(&barcode, args.k)?;
        print_hits(&index, &hits);
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let index = Index::load(&args.index)
        .with_context(|| format!("cannot load index {}", args.index.display()))?;
    let queries = read_manifest(&args.test_manifest)?;

    let table = if let Some(merge_path) = &args.merge_branches {
        let extra = read_manifest(merge_path)?;
        let mut codes: Vec<IrmaCode> = index.entries().iter().map(|e| e.code.clone()).collect();
        codes.extend(extra.into_iter().map(|r| r.code));
        BranchTable::build(&codes)?
    } else {
        let path = args
            .branches
            .clone()
            .unwrap_or_else(|| branches_sidecar(&args.index));
        let text = fs::read_to_string(&path).with_context(|| {
            format!(
                "cannot read branch table {} (pass --branches or --merge-branches)",
                path.display()
            )
        })?;
        BranchTable::parse_text(&text)?
    };

    let pool = bench::thread_pool()?;
    let threads = pool.current_num_threads();
    let mode = match args.mode {
        ModeArg::Linear => SearchMode::Linear { k: args.k },
        ModeArg::Lsh => SearchMode::Lsh { top: args.top },
    };
    let outcome = bench::run(&index, &queries, mode, &table, &pool)?;

    let (mode_name, k, max_candidates) = match args.mode {
        ModeArg::Linear => ("linear", args.k, None),
        ModeArg::Lsh => ("lsh", 1, Some(args.top)),
    };
    let query_count = outcome.per_query.len();
    let failure_rate = outcome.failure_count as f64 / query_count.max(1) as f64;

    println!("mode:        {mode_name}");
    println!(
        "corpus:      {} entries ({}, {} angles, side {}, window {})",
        index.len(),
        index.encoder(),
        index.num_angles(),
        index.image_side(),
        index.smoothing_window()
    );
    println!("queries:     {query_count}");
    println!("total error: {:.6}", outcome.total_error);
    println!("mean error:  {:.6}", outcome.mean_error_per_query);
    println!(
        "failures:    {} ({:.1}%)",
        outcome.failure_count,
        failure_rate * 100.0
    );
    println!("mean query:  {:.3} ms", outcome.mean_query_seconds * 1e3);
    println!("threads:     {threads}");

    if let Some(out) = &args.out {
        let report = BenchmarkReport {
            search_mode: mode_name.to_string(),
            encoder: index.encoder().as_str().to_string(),
            num_angles: index.num_angles(),
            image_side: index.image_side(),
            smoothing_window: index.smoothing_window(),
            corpus_size: index.len(),
            query_count,
            k,
            max_candidates,
            lsh: match args.mode {
                // Linear search never touches the tables, so the report
                // carries LSH parameters only when the LSH path ran.
                ModeArg::Linear => None,
                ModeArg::Lsh => index.lsh_config().map(|cfg| LshReport {
                    num_tables: cfg.num_tables,
                    key_size: cfg.key_size,
                    seed: cfg.seed,
                }),
            },
            total_error: outcome.total_error,
            mean_error_per_query: outcome.mean_error_per_query,
            failure_count: outcome.failure_count,
            failure_rate,
            mean_query_seconds: outcome.mean_query_seconds,
            threads,
            index_path: args.index.display().to_string(),
            test_manifest: args.test_manifest.display().to_string(),
        };
        let json = serde_json::to_string_pretty(&report).context("cannot serialize report")?;
        fs::write(out, json + "\n").with_context(|| format!("cannot write {}", out.display()))?;
        println!("report:      {}", out.display());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    if args.count < 2 {
        return Err(UsageError("--count must be at least 2".to_string()).into());
    }
    let images = synth::write_corpus(&args.out_dir, args.count, args.seed)?;
    println!(
        "wrote {} images and manifest.csv to {} (seed {})",
        images.len(),
        args.out_dir.display(),
        args.seed
    );
    Ok(())
}
