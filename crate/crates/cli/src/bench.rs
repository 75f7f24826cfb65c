//! Benchmark runner: searches every test query against an index in parallel
//! and scores the retrievals with the hierarchical code error.
//!
//! Queries run on a rayon pool (sized by RBC_THREADS when set) and results
//! keep manifest order, so the error accumulation below is a fixed-order
//! float sum and totals reproduce exactly across runs and thread counts.

use std::time::Instant;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use rbc_core::irma::{code_error, BranchTable, IrmaError};
use rbc_core::Index;

use crate::manifest::ManifestRow;
use crate::pipeline::{encode_image_file, EncodeParams};
use crate::UsageError;

#[derive(Clone, Copy)]
pub enum SearchMode {
    /// Exact scan; takes the top hit of a k-NN query.
    Linear { k: usize },
    /// LSH candidates re-ranked by pixel correlation. An empty candidate set
    /// falls back to an exact 1-NN scan and is counted as a failure.
    Lsh { top: usize },
}

#[derive(Debug)]
pub struct QueryOutcome {
    pub query_id: String,
    pub retrieved_id: String,
    pub seconds: f64,
    pub fallback: bool,
}

#[derive(Debug)]
pub struct BenchOutcome {
    /// One outcome per test manifest row, in manifest order.
    pub per_query: Vec<QueryOutcome>,
    pub total_error: f64,
    pub mean_error_per_query: f64,
    pub failure_count: usize,
    pub mean_query_seconds: f64,
}

fn parse_threads(raw: &str) -> Result<usize, UsageError> {
    raw.trim()
        .parse::<usize>()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| {
            UsageError(format!("RBC_THREADS must be a positive integer, found {raw:?}"))
        })
}

/// Builds the worker pool. RBC_THREADS pins the thread count; unset leaves
/// rayon's default.
pub fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    match std::env::var("RBC_THREADS") {
        Ok(raw) => builder = builder.num_threads(parse_threads(&raw)?),
        Err(std::env::VarError::NotPresent) => {}
        Err(std::env::VarError::NotUnicode(raw)) => {
            return Err(UsageError(format!(
                "RBC_THREADS must be a positive integer, found {raw:?}"
            ))
            .into());
        }
    }
    builder.build().context("cannot build thread pool")
}

fn run_one(
    index: &Index,
    row: &ManifestRow,
    params: EncodeParams,
    mode: SearchMode,
) -> anyhow::Result<QueryOutcome> {
    let started = Instant::now();
    let (square, _, barcode) =
        encode_image_file(&row.path, params).with_context(|| format!("query {}", row.id))?;
    let (retrieved_id, fallback) = match mode {
        SearchMode::Linear { k } => {
            let hits = index.knn(&barcode, k)?;
            (hits[0].0.clone(), false)
        }
        SearchMode::Lsh { top } => {
            let candidates = index.lsh_candidates(&barcode, top)?;
            if candidates.is_empty() {
                let hits = index.knn(&barcode, 1)?;
                (hits[0].0.clone(), true)
            } else {
                (index.rerank_correlation(&candidates, &square)?, false)
            }
        }
    };
    Ok(QueryOutcome {
        query_id: row.id.clone(),
        retrieved_id,
        seconds: started.elapsed().as_secs_f64(),
        fallback,
    })
}

fn scoring_error(e: IrmaError) -> anyhow::Error {
    if matches!(e, IrmaError::MissingBranchEntry { .. }) {
        anyhow!(e).context(
            "branch table does not cover the query codes; rebuild it with \
             --merge-branches pointing at the test manifest",
        )
    } else {
        anyhow!(e)
    }
}

pub fn run(
    index: &Index,
    queries: &[ManifestRow],
    mode: SearchMode,
    table: &BranchTable,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<BenchOutcome> {
    let params = EncodeParams::of_index(index);
    let results: Vec<anyhow::Result<QueryOutcome>> = pool.install(|| {
        queries
            .par_iter()
            .map(|row| run_one(index, row, params, mode))
            .collect()
    });
    let mut per_query = Vec::with_capacity(results.len());
    for r in results {
        per_query.push(r?);
    }

    let mut total_error = 0.0f64;
    for (row, outcome) in queries.iter().zip(&per_query) {
        let retrieved = index.entry(&outcome.retrieved_id).ok_or_else(|| {
            anyhow!("retrieved id {:?} vanished from the index", outcome.retrieved_id)
        })?;
        total_error += code_error(&row.code, &retrieved.code, table).map_err(scoring_error)?;
    }

    let failure_count = per_query.iter().filter(|q| q.fallback).count();
    let n = per_query.len().max(1) as f64;
    let mean_query_seconds = per_query.iter().map(|q| q.seconds).sum::<f64>() / n;
    Ok(BenchOutcome {
        total_error,
        mean_error_per_query: total_error / n,
        failure_count,
        mean_query_seconds,
        per_query,
    })
}
