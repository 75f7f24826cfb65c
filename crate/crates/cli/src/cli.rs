//! Command-line surface of `rbc`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbc_core::EncoderKind;

#[derive(Parser)]
#[command(
    name = "rbc",
    version,
    about = "Radon barcodes: encode grayscale images into binary codes, index them, and search by Hamming distance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Encode one image and print its barcode as text
    Encode(EncodeArgs),
    /// Build a searchable index from a manifest of images
    Index(IndexArgs),
    /// Search an index with a query image
    Query(QueryArgs),
    /// Score retrieval quality over a manifest of test queries
    Bench(BenchArgs),
    /// Generate a synthetic labeled image corpus
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum EncoderArg {
    Threshold,
    Minmax,
}

impl EncoderArg {
    pub fn kind(self) -> EncoderKind {
        match self {
            EncoderArg::Threshold => EncoderKind::Threshold,
            EncoderArg::Minmax => EncoderKind::MinMax,
        }
    }
}

#[derive(Args)]
pub struct EncodeArgs {
    /// Image file, PNG or PGM (format sniffed from content)
    pub image: PathBuf,

    #[arg(long, value_enum, default_value_t = EncoderArg::Threshold)]
    pub encoder: EncoderArg,

    /// Number of projection angles in [0, 180)
    #[arg(long, default_value_t = 8)]
    pub angles: usize,

    /// Side of the normalized square image
    #[arg(long, default_value_t = 32)]
    pub size: usize,

    /// Smoothing window for the minmax encoder (odd; defaults to 5)
    #[arg(long)]
    pub window: Option<usize>,

    /// Also write the barcode as a PBM bitmap (one row per angle)
    #[arg(long, value_name = "FILE")]
    pub pbm: Option<PathBuf>,

    /// Also dump the raw projections as CSV (angle_deg, then bin values)
    #[arg(long, value_name = "FILE")]
    pub dump_projections: Option<PathBuf>,
}

#[derive(Args)]
pub struct IndexArgs {
    /// Manifest CSV with header id,path,irma_code; paths resolve relative to
    /// the manifest's directory
    #[arg(long)]
    pub manifest: PathBuf,

    /// Output index file; a branch-table sidecar lands at <out>.branches
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = EncoderArg::Threshold)]
    pub encoder: EncoderArg,

    #[arg(long, default_value_t = 8)]
    pub angles: usize,

    #[arg(long, default_value_t = 32)]
    pub size: usize,

    /// Smoothing window for the minmax encoder (odd; defaults to 5)
    #[arg(long)]
    pub window: Option<usize>,

    /// Also build LSH tables for sublinear candidate lookup
    #[arg(long)]
    pub lsh: bool,

    /// Number of LSH hash tables
    #[arg(long, default_value_t = 30, requires = "lsh")]
    pub tables: usize,

    /// Bits sampled per LSH key (default: a third of the barcode length)
    #[arg(long, requires = "lsh")]
    pub key_size: Option<usize>,

    /// Seed for LSH bit sampling
    #[arg(long, default_value_t = 1, requires = "lsh")]
    pub seed: u64,
}

#[derive(Args)]
pub struct QueryArgs {
    /// Index file produced by `rbc index`
    #[arg(long)]
    pub index: PathBuf,

    /// Query image
    #[arg(long)]
    pub image: PathBuf,

    /// Number of nearest neighbors to print (exact search)
    #[arg(long, default_value_t = 1, conflicts_with = "lsh")]
    pub k: usize,

    /// Search through the index's LSH tables instead of scanning
    #[arg(long)]
    pub lsh: bool,

    /// Candidate list size in LSH mode
    #[arg(long, default_value_t = 10, requires = "lsh")]
    pub top: usize,

    /// Re-rank LSH candidates by pixel correlation and print only the winner
    #[arg(long, requires = "lsh")]
    pub rerank: bool,

    /// Assert the index was built with this encoder (the index config always
    /// wins; a mismatch is an error)
    #[arg(long, value_enum)]
    pub encoder: Option<EncoderArg>,

    /// Assert the index's angle count
    #[arg(long)]
    pub angles: Option<usize>,

    /// Assert the index's normalized image side
    #[arg(long)]
    pub size: Option<usize>,

    /// Assert the index's smoothing window
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum ModeArg {
    /// Exact k-NN over every entry
    Linear,
    /// LSH candidates re-ranked by pixel correlation
    Lsh,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Index file to search
    #[arg(long)]
    pub index: PathBuf,

    /// Manifest CSV of test queries (id,path,irma_code)
    #[arg(long)]
    pub test_manifest: PathBuf,

    /// Search pipeline to measure
    #[arg(long, value_enum)]
    pub mode: ModeArg,

    /// k for linear mode
    #[arg(long, default_value_t = 1)]
    pub k: usize,

    /// Candidate list size for lsh mode
    #[arg(long, default_value_t = 10)]
    pub top: usize,

    /// Write the report as JSON here
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Branch table file (default: <index>.branches)
    #[arg(long, value_name = "FILE", conflicts_with = "merge_branches")]
    pub branches: Option<PathBuf>,

    /// Rebuild the branch table from the index codes merged with this
    /// manifest's codes (for queries whose prefixes the corpus lacks)
    #[arg(long, value_name = "CSV")]
    pub merge_branches: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Directory for the images and their manifest.csv
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Number of images to generate (at least 2)
    #[arg(long)]
    pub count: usize,

    /// Generator seed; equal seeds reproduce byte-identical corpora
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
