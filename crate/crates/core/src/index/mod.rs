//! Retrieval index over barcodes: exact k-NN in Hamming space, bit-sampling
//! LSH with optional correlation re-ranking, and a versioned binary file
//! format.
//!
//! Every entry in an index carries barcodes from one encoder configuration;
//! queries must match it. Ranking is always by (distance, id) so results are
//! reproducible across runs and platforms.

mod lsh;
mod persist;

pub use lsh::LshConfig;

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::path::PathBuf;

use crate::barcode::{hamming, Barcode, EncoderKind};
use crate::imaging::{load_grayscale, normalize, GrayImage, ImagingError};
use crate::irma::IrmaCode;

/// One indexed image: stable id, its barcode, its IRMA code, and optionally a
/// path back to the pixels (needed only for correlation re-ranking).
#[derive(Debug, Clone)]
pub struct IndexEntry {
    pub id: String,
    pub barcode: Barcode,
    pub code: IrmaCode,
    pub image_ref: Option<PathBuf>,
}

pub struct Index {
    entries: Vec<IndexEntry>,
    by_id: HashMap<String, usize>,
    lsh: Option<lsh::LshPart>,
}

#[derive(Debug)]
pub enum IndexError {
    EmptyIndex,
    DuplicateId(String),
    IncomparableBarcodes(String),
    InvalidK { k: usize, size: usize },
    InvalidLshConfig(String),
    MissingLsh,
    EmptyCandidates,
    MissingImageRef(String),
    UnknownId(String),
    Imaging(ImagingError),
    Io(io::Error),
    CorruptIndexFile(String),
    FormatVersionMismatch { found: u16 },
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::EmptyIndex => write!(f, "an index needs at least one entry"),
            IndexError::DuplicateId(id) => write!(f, "duplicate entry id {id:?}"),
            IndexError::IncomparableBarcodes(s) => write!(f, "incomparable barcodes: {s}"),
            IndexError::InvalidK { k, size } => {
                write!(f, "k={k} outside 1..={size}")
            }
            IndexError::InvalidLshConfig(s) => write!(f, "invalid LSH configuration: {s}"),
            IndexError::MissingLsh => write!(f, "index was built without LSH tables"),
            IndexError::EmptyCandidates => write!(f, "re-ranking needs at least one candidate"),
            IndexError::MissingImageRef(id) => {
                write!(f, "entry {id:?} has no image path, cannot re-rank by correlation")
            }
            IndexError::UnknownId(id) => write!(f, "candidate id {id:?} is not in the index"),
            IndexError::Imaging(e) => write!(f, "{e}"),
            IndexError::Io(e) => write!(f, "i/o error: {e}"),
            IndexError::CorruptIndexFile(s) => write!(f, "corrupt index file: {s}"),
            IndexError::FormatVersionMismatch { found } => {
                write!(f, "index format version {found} is not supported (expected 1)")
            }
        }
    }
}

impl std::error::Error for IndexError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IndexError::Imaging(e) => Some(e),
            IndexError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for IndexError {
    fn from(e: io::Error) -> Self {
        IndexError::Io(e)
    }
}

impl From<ImagingError> for IndexError {
    fn from(e: ImagingError) -> Self {
        IndexError::Imaging(e)
    }
}

fn validate_entries(entries: &[IndexEntry]) -> Result<HashMap<String, usize>, IndexError> {
    if entries.is_empty() {
        return Err(IndexError::EmptyIndex);
    }
    let mut by_id = HashMap::with_capacity(entries.len());
    let first = &entries[0].barcode;
    for (i, e) in entries.iter().enumerate() {
        if by_id.insert(e.id.clone(), i).is_some() {
            return Err(IndexError::DuplicateId(e.id.clone()));
        }
        if !e.barcode.compatible_with(first) {
            return Err(IndexError::IncomparableBarcodes(format!(
                "entry {:?} does not match the configuration of entry {:?}",
                e.id, entries[0].id
            )));
        }
    }
    Ok(by_id)
}

impl Index {
    /// Exact-search index; queries scan every entry.
    pub fn build_linear(entries: Vec<IndexEntry>) -> Result<Self, IndexError> {
        let by_id = validate_entries(&entries)?;
        Ok(Index { entries, by_id, lsh: None })
    }

    /// Index with bit-sampling LSH tables on top of the linear entries.
    ///
    /// Table t hashes a barcode to the cfg.key_size bits at positions drawn
    /// without replacement from a ChaCha8 stream derived from (cfg.seed, t),
    /// so the same seed always yields the same tables.
    pub fn build_lsh(entries: Vec<IndexEntry>, cfg: LshConfig) -> Result<Self, IndexError> {
        let by_id = validate_entries(&entries)?;
        let bits = entries[0].barcode.len();
        lsh::validate_config(&cfg, bits)?;
        let positions = lsh::draw_positions(&cfg, bits);
        let part = lsh::assemble(&entries, cfg, positions);
        Ok(Index { entries, by_id, lsh: Some(part) })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn entry(&self, id: &str) -> Option<&IndexEntry> {
        self.by_id.get(id).map(|i| &self.entries[*i])
    }

    pub fn has_lsh(&self) -> bool {
        self.lsh.is_some()
    }

    pub fn lsh_config(&self) -> Option<&LshConfig> {
        self.lsh.as_ref().map(|l| &l.cfg)
    }

    pub fn encoder(&self) -> EncoderKind {
        self.entries[0].barcode.encoder()
    }

    pub fn num_angles(&self) -> usize {
        self.entries[0].barcode.num_angles()
    }

    pub fn image_side(&self) -> usize {
        self.entries[0].barcode.image_side()
    }

    pub fn smoothing_window(&self) -> usize {
        self.entries[0].barcode.smoothing_window()
    }

    fn check_query(&self, query: &Barcode) -> Result<(), IndexError> {
        if !query.compatible_with(&self.entries[0].barcode) {
            return Err(IndexError::IncomparableBarcodes(
                "query configuration does not match the index".into(),
            ));
        }
        Ok(())
    }

    /// The k nearest entries by Hamming distance, ties broken by ascending id.
    pub fn knn(&self, query: &Barcode, k: usize) -> Result<Vec<(String, usize)>, IndexError> {
        if k == 0 || k > self.entries.len() {
            return Err(IndexError::InvalidK { k, size: self.entries.len() });
        }
        self.check_query(query)?;
        let mut ranked: Vec<(usize, usize)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (hamming(&e.barcode, query).expect("entries vetted at build"), i))
            .collect();
        ranked.sort_unstable_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| self.entries[a.1].id.cmp(&self.entries[b.1].id))
        });
        ranked.truncate(k);
        Ok(ranked.into_iter().map(|(d, i)| (self.entries[i].id.clone(), d)).collect())
    }

    /// Entries sharing at least one LSH bucket with the query, ranked by exact
    /// Hamming distance (ties by id) and truncated to max_candidates. May be
    /// empty when nothing collides.
    pub fn lsh_candidates(
        &self,
        query: &Barcode,
        max_candidates: usize,
    ) -> Result<Vec<(String, usize)>, IndexError> {
        let part = self.lsh.as_ref().ok_or(IndexError::MissingLsh)?;
        if max_candidates == 0 {
            return Err(IndexError::InvalidK { k: 0, size: self.entries.len() });
        }
        self.check_query(query)?;
        let mut seen: Vec<u32> = Vec::new();
        for table in &part.tables {
            let key = lsh::key_of(query, &table.positions);
            if let Some(bucket) = table.buckets.get(&key) {
                seen.extend_from_slice(bucket);
            }
        }
        seen.sort_unstable();
        seen.dedup();
        let mut ranked: Vec<(usize, usize)> = seen
            .into_iter()
            .map(|i| {
                let i = i as usize;
                (hamming(&self.entries[i].barcode, query).expect("entries vetted at build"), i)
            })
            .collect();
        ranked.sort_unstable_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| self.entries[a.1].id.cmp(&self.entries[b.1].id))
        });
        ranked.truncate(max_candidates);
        Ok(ranked.into_iter().map(|(d, i)| (self.entries[i].id.clone(), d)).collect())
    }

    /// Picks the candidate whose pixels correlate best with the query image.
    ///
    /// Candidate images load from their stored paths and are resampled to the
    /// query's dimensions; Pearson correlation is taken over the flattened
    /// intensities, with zero-variance images scoring 0. Ties go to the
    /// lexicographically smallest id.
    pub fn rerank_correlation(
        &self,
        candidates: &[(String, usize)],
        query_img: &GrayImage,
    ) -> Result<String, IndexError> {
        if candidates.is_empty() {
            return Err(IndexError::EmptyCandidates);
        }
        let mut best: Option<(f64, &str)> = None;
        for (id, _) in candidates {
            let entry = self.entry(id).ok_or_else(|| IndexError::UnknownId(id.clone()))?;
            let path = entry
                .image_ref
                .as_ref()
                .ok_or_else(|| IndexError::MissingImageRef(id.clone()))?;
            let img = load_grayscale(path)?;
            let img = normalize(&img, query_img.height(), query_img.width())?;
            let corr = pearson(query_img.pixels(), img.pixels());
            let better = match &best {
                None => true,
                Some((bc, bid)) => corr > *bc || (corr == *bc && id.as_str() < *bid),
            };
            if better {
                best = Some((corr, id));
            }
        }
        Ok(best.expect("candidates nonempty").1.to_string())
    }
}

/// Pearson correlation over aligned slices; 0 when either side has no
/// variance.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcode::EncoderKind;
    use std::io::Write;
    use std::path::Path;

    // side 2 -> 5 bins, 1 angle -> 5-bit barcodes
    pub(super) fn bc(bits: [u8; 5]) -> Barcode {
        let b: Vec<bool> = bits.iter().map(|v| *v == 1).collect();
        Barcode::from_bits(&b, EncoderKind::Threshold, 1, 2, 0).unwrap()
    }

    pub(super) fn entry(id: &str, bits: [u8; 5]) -> IndexEntry {
        IndexEntry {
            id: id.into(),
            barcode: bc(bits),
            code: "11-22-33-44".parse().unwrap(),
            image_ref: None,
        }
    }

    #[test]
    fn build_rejects_bad_entry_sets() {
        assert!(matches!(Index::build_linear(vec![]), Err(IndexError::EmptyIndex)));
        let dup = vec![entry("a", [0; 5]), entry("a", [1, 0, 0, 0, 0])];
        assert!(matches!(Index::build_linear(dup), Err(IndexError::DuplicateId(_))));
        let mut mixed = vec![entry("a", [0; 5])];
        mixed.push(IndexEntry {
            id: "b".into(),
            barcode: Barcode::from_bits(&[false; 5], EncoderKind::MinMax, 1, 2, 3).unwrap(),
            code: "11-22-33-44".parse().unwrap(),
            image_ref: None,
        });
        assert!(matches!(Index::build_linear(mixed), Err(IndexError::IncomparableBarcodes(_))));
    }

    #[test]
    fn knn_orders_by_distance_then_id() {
        let idx = Index::build_linear(vec![
            entry("c", [1, 1, 0, 0, 0]), // d=2
            entry("a", [1, 0, 0, 0, 1]), // d=2
            entry("b", [0, 0, 0, 0, 0]), // d=0
            entry("d", [1, 1, 1, 1, 1]), // d=5
        ])
        .unwrap();
        let q = bc([0; 5]);
        let got = idx.knn(&q, 4).unwrap();
        assert_eq!(
            got,
            vec![
                ("b".to_string(), 0),
                ("a".to_string(), 2),
                ("c".to_string(), 2),
                ("d".to_string(), 5)
            ]
        );
        let top2 = idx.knn(&q, 2).unwrap();
        assert_eq!(top2.len(), 2);
        assert_eq!(top2[0].0, "b");
    }

    #[test]
    fn knn_validates_k_and_query() {
        let idx = Index::build_linear(vec![entry("a", [0; 5])]).unwrap();
        let q = bc([0; 5]);
        assert!(matches!(idx.knn(&q, 0), Err(IndexError::InvalidK { k: 0, .. })));
        assert!(matches!(idx.knn(&q, 2), Err(IndexError::InvalidK { k: 2, .. })));
        let alien = Barcode::from_bits(&[false; 5], EncoderKind::MinMax, 1, 2, 3).unwrap();
        assert!(matches!(idx.knn(&alien, 1), Err(IndexError::IncomparableBarcodes(_))));
    }

    #[test]
    fn knn_matches_exhaustive_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut entries = Vec::new();
        let mut plain = Vec::new();
        for i in 0..40 {
            let bits: Vec<bool> = (0..5).map(|_| rng.gen_bool(0.5)).collect();
            let arr = [
                u8::from(bits[0]),
                u8::from(bits[1]),
                u8::from(bits[2]),
                u8::from(bits[3]),
                u8::from(bits[4]),
            ];
            let id = format!("e{i:02}");
            entries.push(entry(&id, arr));
            plain.push((id, bits));
        }
        let idx = Index::build_linear(entries).unwrap();
        for _ in 0..20 {
            let qbits: Vec<bool> = (0..5).map(|_| rng.gen_bool(0.5)).collect();
            let qarr = [
                u8::from(qbits[0]),
                u8::from(qbits[1]),
                u8::from(qbits[2]),
                u8::from(qbits[3]),
                u8::from(qbits[4]),
            ];
            let got = idx.knn(&bc(qarr), 10).unwrap();
            let want = rbc_testkit::exhaustive_ranking(&plain, &qbits);
            assert_eq!(got, want[..10].to_vec());
        }
    }

    #[test]
    fn missing_lsh_is_an_error() {
        let idx = Index::build_linear(vec![entry("a", [0; 5])]).unwrap();
        assert!(matches!(idx.lsh_candidates(&bc([0; 5]), 5), Err(IndexError::MissingLsh)));
    }

    fn write_pgm(path: &Path, side: usize, pixels: &[u8]) {
        let mut f = std::fs::File::create(path).unwrap();
        write!(f, "P5\n{side} {side}\n255\n").unwrap();
        f.write_all(pixels).unwrap();
    }

    #[test]
    fn rerank_picks_strongest_correlation() {
        let dir = tempfile::tempdir().unwrap();
        let q: Vec<u8> = (0..16).map(|i| (i * 16) as u8).collect();
        // affine transform of the query: correlation 1
        let twin: Vec<u8> = q.iter().map(|v| v / 2 + 30).collect();
        let anti: Vec<u8> = q.iter().rev().copied().collect();
        let twin_path = dir.path().join("twin.pgm");
        let anti_path = dir.path().join("anti.pgm");
        write_pgm(&twin_path, 4, &twin);
        write_pgm(&anti_path, 4, &anti);
        let entries = vec![
            IndexEntry {
                id: "anti".into(),
                barcode: bc([0; 5]),
                code: "11-22-33-44".parse().unwrap(),
                image_ref: Some(anti_path),
            },
            IndexEntry {
                id: "twin".into(),
                barcode: bc([1, 0, 0, 0, 0]),
                code: "11-22-33-44".parse().unwrap(),
                image_ref: Some(twin_path),
            },
        ];
        let idx = Index::build_linear(entries).unwrap();
        let qimg = GrayImage::new(4, 4, q.iter().map(|v| *v as f64 / 255.0).collect()).unwrap();
        let cands = vec![("anti".to_string(), 0), ("twin".to_string(), 1)];
        assert_eq!(idx.rerank_correlation(&cands, &qimg).unwrap(), "twin");
    }

    #[test]
    fn rerank_error_cases() {
        let idx = Index::build_linear(vec![entry("a", [0; 5])]).unwrap();
        let qimg = GrayImage::new(2, 2, vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(matches!(idx.rerank_correlation(&[], &qimg), Err(IndexError::EmptyCandidates)));
        let cands = vec![("a".to_string(), 0)];
        assert!(matches!(
            idx.rerank_correlation(&cands, &qimg),
            Err(IndexError::MissingImageRef(_))
        ));
        let ghost = vec![("zz".to_string(), 0)];
        assert!(matches!(idx.rerank_correlation(&ghost, &qimg), Err(IndexError::UnknownId(_))));
    }

    #[test]
    fn pearson_constant_image_scores_zero() {
        assert_eq!(pearson(&[0.5, 0.5, 0.5], &[0.1, 0.2, 0.3]), 0.0);
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((r - 1.0).abs() < 1e-12);
    }
}
