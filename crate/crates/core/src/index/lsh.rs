//! Bit-sampling LSH over barcodes.
//!
//! Each table projects a barcode onto a fixed subset of bit positions; equal
//! projections land in the same bucket. Position subsets are drawn without
//! replacement from a ChaCha8 generator seeded with the config seed and one
//! stream per table, so a (seed, num_tables, key_size) triple fully determines
//! the tables.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::barcode::Barcode;

use super::{IndexEntry, IndexError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LshConfig {
    pub num_tables: usize,
    pub key_size: usize,
    pub seed: u64,
}

impl LshConfig {
    /// Default key size for a barcode length: one third of the bits.
    pub fn default_key_size(barcode_len: usize) -> usize {
        barcode_len / 3
    }
}

pub(crate) struct LshPart {
    pub(crate) cfg: LshConfig,
    pub(crate) tables: Vec<Table>,
}

pub(crate) struct Table {
    // ascending bit positions, key_size of them
    pub(crate) positions: Vec<u32>,
    // packed key bits -> entry indices in insertion order
    pub(crate) buckets: HashMap<Vec<u64>, Vec<u32>>,
}

pub(crate) fn validate_config(cfg: &LshConfig, barcode_len: usize) -> Result<(), IndexError> {
    if cfg.num_tables == 0 {
        return Err(IndexError::InvalidLshConfig("num_tables must be >= 1".into()));
    }
    if cfg.key_size == 0 || cfg.key_size > barcode_len {
        return Err(IndexError::InvalidLshConfig(format!(
            "key_size {} outside 1..={barcode_len}",
            cfg.key_size
        )));
    }
    Ok(())
}

pub(crate) fn draw_positions(cfg: &LshConfig, barcode_len: usize) -> Vec<Vec<u32>> {
    (0..cfg.num_tables)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let mut positions: Vec<u32> = rand::seq::index::sample(&mut rng, barcode_len, cfg.key_size)
                .into_iter()
                .map(|p| p as u32)
                .collect();
            positions.sort_unstable();
            positions
        })
        .collect()
}

pub(crate) fn assemble(
    entries: &[IndexEntry],
    cfg: LshConfig,
    positions_per_table: Vec<Vec<u32>>,
) -> LshPart {
    let tables = positions_per_table
        .into_iter()
        .map(|positions| {
            let mut buckets: HashMap<Vec<u64>, Vec<u32>> = HashMap::new();
            for (i, e) in entries.iter().enumerate() {
                let key = key_of(&e.barcode, &positions);
                buckets.entry(key).or_default().push(i as u32);
            }
            Table { positions, buckets }
        })
        .collect();
    LshPart { cfg, tables }
}

/// Packs the barcode bits at `positions` into words, LSB first.
pub(crate) fn key_of(barcode: &Barcode, positions: &[u32]) -> Vec<u64> {
    let mut key = vec![0u64; positions.len().div_ceil(64)];
    for (j, pos) in positions.iter().enumerate() {
        if barcode.bit(*pos as usize) {
            key[j / 64] |= 1u64 << (j % 64);
        }
    }
    key
}

#[cfg(test)]
mod tests {
    use super::super::tests::{bc, entry};
    use super::super::Index;
    use super::*;

    #[test]
    fn positions_are_deterministic_and_sorted() {
        let cfg = LshConfig { num_tables: 4, key_size: 3, seed: 99 };
        let a = draw_positions(&cfg, 5);
        let b = draw_positions(&cfg, 5);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        for table in &a {
            assert_eq!(table.len(), 3);
            assert!(table.windows(2).all(|w| w[0] < w[1]));
            assert!(table.iter().all(|p| *p < 5));
        }
        // tables use different streams, so at least one pair should differ
        assert!(a.iter().any(|t| *t != a[0]));
    }

    #[test]
    fn different_seeds_give_different_tables() {
        let a = draw_positions(&LshConfig { num_tables: 8, key_size: 40, seed: 1 }, 376);
        let b = draw_positions(&LshConfig { num_tables: 8, key_size: 40, seed: 2 }, 376);
        assert_ne!(a, b);
    }

    #[test]
    fn full_key_collides_exactly_on_equal_barcodes() {
        let entries = vec![
            entry("a", [1, 0, 1, 0, 1]),
            entry("b", [1, 0, 1, 0, 1]), // duplicate bits of a
            entry("c", [0, 1, 0, 1, 0]),
        ];
        let cfg = LshConfig { num_tables: 2, key_size: 5, seed: 5 };
        let idx = Index::build_lsh(entries, cfg).unwrap();
        let got = idx.lsh_candidates(&bc([1, 0, 1, 0, 1]), 10).unwrap();
        assert_eq!(got, vec![("a".to_string(), 0), ("b".to_string(), 0)]);
    }

    #[test]
    fn candidates_rank_by_distance_and_respect_the_cap() {
        let entries = vec![
            entry("a", [1, 1, 1, 1, 1]),
            entry("b", [1, 1, 1, 1, 0]),
            entry("c", [1, 1, 1, 0, 0]),
            entry("d", [0, 0, 0, 0, 0]),
        ];
        // key_size 1: single-bit keys collide generously, so the union covers
        // everything and ranking is purely by exact distance
        let cfg = LshConfig { num_tables: 10, key_size: 1, seed: 3 };
        let idx = Index::build_lsh(entries, cfg).unwrap();
        let q = bc([1, 1, 1, 1, 1]);
        let all = idx.lsh_candidates(&q, 10).unwrap();
        assert_eq!(all[0], ("a".to_string(), 0));
        for w in all.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
        let capped = idx.lsh_candidates(&q, 2).unwrap();
        assert_eq!(capped.len(), 2);
        assert_eq!(capped[0].0, "a");
    }

    #[test]
    fn config_validation() {
        let entries = vec![entry("a", [0; 5])];
        let bad_tables = LshConfig { num_tables: 0, key_size: 2, seed: 0 };
        assert!(matches!(
            Index::build_lsh(entries.clone(), bad_tables),
            Err(IndexError::InvalidLshConfig(_))
        ));
        let bad_key = LshConfig { num_tables: 1, key_size: 6, seed: 0 };
        assert!(matches!(
            Index::build_lsh(entries.clone(), bad_key),
            Err(IndexError::InvalidLshConfig(_))
        ));
        let zero_key = LshConfig { num_tables: 1, key_size: 0, seed: 0 };
        assert!(matches!(
            Index::build_lsh(entries, zero_key),
            Err(IndexError::InvalidLshConfig(_))
        ));
    }

    #[test]
    fn default_key_size_is_a_third() {
        assert_eq!(LshConfig::default_key_size(376), 125);
        assert_eq!(LshConfig::default_key_size(752), 250);
    }
}
