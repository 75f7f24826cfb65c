//! Helpers shared by the acceptance criteria tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Mutex, MutexGuard, OnceLock};

use rbc_cli::manifest::{read_manifest, ManifestRow};
use rbc_cli::pipeline::{encode_image_file, EncodeParams};
use rbc_cli::synth;
use rbc_core::barcode::EncoderKind;
use rbc_core::{Index, IndexEntry, LshConfig};

/// Criteria run strictly one at a time. Several carry wall-clock budgets and
/// the box may have a single core; sharing it would make those timings
/// meaningless.
pub fn criterion_lock() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

pub const CORPUS_SIZE: usize = 1000;
pub const CORPUS_SEED: u64 = 101;
pub const CORPUS_LSH_SEED: u64 = 1;
pub const CORPUS_LSH_TABLES: usize = 30;

/// The desk-scale corpus several criteria share: 1,000 synthetic images on
/// disk, their minmax barcodes, and an LSH index over them (30 tables,
/// key_size = length/3). Built once per test run under target/tmp.
pub struct SharedCorpus {
    pub rows: Vec<ManifestRow>,
    pub entries: Vec<IndexEntry>,
    pub lsh_index: Index,
}

impl SharedCorpus {
    pub fn bits(&self) -> usize {
        self.entries[0].barcode.len()
    }
}

pub fn corpus_1000() -> &'static SharedCorpus {
    static CORPUS: OnceLock<SharedCorpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-corpus");
        synth::write_corpus(&dir, CORPUS_SIZE, CORPUS_SEED).expect("corpus generation");
        let rows = read_manifest(&dir.join("manifest.csv")).expect("corpus manifest");
        let params = EncodeParams::resolve_cli(EncoderKind::MinMax, 8, 32, None).unwrap();
        let entries: Vec<IndexEntry> = rows
            .iter()
            .map(|r| {
                let (_, _, barcode) = encode_image_file(&r.path, params).unwrap();
                IndexEntry {
                    id: r.id.clone(),
                    barcode,
                    code: r.code.clone(),
                    image_ref: Some(r.path.clone()),
                }
            })
            .collect();
        let bits = entries[0].barcode.len();
        let cfg = LshConfig {
            num_tables: CORPUS_LSH_TABLES,
            key_size: LshConfig::default_key_size(bits),
            seed: CORPUS_LSH_SEED,
        };
        let lsh_index = Index::build_lsh(entries.clone(), cfg).expect("lsh index");
        SharedCorpus { rows, entries, lsh_index }
    })
}

pub fn run_rbc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("rbc binary runs")
}
