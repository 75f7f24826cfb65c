//! Binary index file format, version 1.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "RBIX"            magic
//! u16  version      (1)
//! u8   flags        bit 0: LSH section present
//! u8   encoder      0 threshold, 1 minmax
//! u32  num_angles
//! u32  image_side
//! u32  smoothing_window
//! u64  bits_per_barcode
//! u64  entry_count
//! entry * entry_count:
//!     u32 + bytes   id (UTF-8)
//!     u32 + bytes   IRMA code (canonical text)
//!     u32 + bytes   image path (UTF-8, length 0 = none)
//!     bytes         barcode, ceil(bits/8) bytes, LSB-first per byte
//! LSH section (only when flagged):
//!     u32  num_tables
//!     u32  key_size
//!     u64  seed
//!     u32 * key_size * num_tables   sampled positions, per table
//! ```
//!
//! Writes are buffered into one Vec in entry order with no map iteration, so
//! saving the same index twice produces byte-identical files. Buckets are not
//! stored; load re-hashes every entry into the persisted positions.

use std::fs;
use std::path::{Path, PathBuf};

use crate::barcode::{Barcode, EncoderKind};
use crate::radon::bins_per_angle;

use super::{lsh, validate_entries, Index, IndexEntry, IndexError};

const MAGIC: &[u8; 4] = b"RBIX";
const VERSION: u16 = 1;

impl Index {
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(u8::from(self.lsh.is_some()));
        let first = &self.entries[0].barcode;
        buf.push(match first.encoder() {
            EncoderKind::Threshold => 0u8,
            EncoderKind::MinMax => 1u8,
        });
        buf.extend_from_slice(&(first.num_angles() as u32).to_le_bytes());
        buf.extend_from_slice(&(first.image_side() as u32).to_le_bytes());
        buf.extend_from_slice(&(first.smoothing_window() as u32).to_le_bytes());
        buf.extend_from_slice(&(first.len() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            write_str(&mut buf, &e.id);
            write_str(&mut buf, &e.code.to_string());
            match &e.image_ref {
                None => write_str(&mut buf, ""),
                Some(p) => {
                    let s = p.to_str().ok_or_else(|| {
                        IndexError::CorruptIndexFile(format!(
                            "image path for {:?} is not valid UTF-8 and cannot be stored",
                            e.id
                        ))
                    })?;
                    write_str(&mut buf, s);
                }
            }
            buf.extend_from_slice(&pack_bits(&e.barcode));
        }
        if let Some(part) = &self.lsh {
            buf.extend_from_slice(&(part.cfg.num_tables as u32).to_le_bytes());
            buf.extend_from_slice(&(part.cfg.key_size as u32).to_le_bytes());
            buf.extend_from_slice(&part.cfg.seed.to_le_bytes());
            for table in &part.tables {
                for pos in &table.positions {
                    buf.extend_from_slice(&pos.to_le_bytes());
                }
            }
        }
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let bytes = fs::read(path)?;
        let mut r = Reader { bytes: &bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(IndexError::CorruptIndexFile("bad magic, not an RBIX file".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(IndexError::FormatVersionMismatch { found: version });
        }
        let flags = r.u8()?;
        if flags > 1 {
            return Err(IndexError::CorruptIndexFile(format!("unknown flags 0x{flags:02x}")));
        }
        let encoder = match r.u8()? {
            0 => EncoderKind::Threshold,
            1 => EncoderKind::MinMax,
            other => {
                return Err(IndexError::CorruptIndexFile(format!("unknown encoder byte {other}")))
            }
        };
        let num_angles = r.u32()? as usize;
        let image_side = r.u32()? as usize;
        let window = r.u32()? as usize;
        let bits_len = r.u64()? as usize;
        if num_angles == 0 || image_side == 0 {
            return Err(IndexError::CorruptIndexFile("zero num_angles or image_side".into()));
        }
        if bits_len != num_angles * bins_per_angle(image_side) {
            return Err(IndexError::CorruptIndexFile(format!(
                "bit count {bits_len} inconsistent with {num_angles} angles at side {image_side}"
            )));
        }
        let entry_count = r.u64()? as usize;
        if entry_count == 0 {
            return Err(IndexError::CorruptIndexFile("index holds zero entries".into()));
        }
        let mut entries = Vec::with_capacity(entry_count);
        for _ in 0..entry_count {
            let id = r.string()?;
            let code_text = r.string()?;
            let code = code_text.parse().map_err(|e| {
                IndexError::CorruptIndexFile(format!("entry {id:?}: {e}"))
            })?;
            let ref_text = r.string()?;
            let image_ref = if ref_text.is_empty() { None } else { Some(PathBuf::from(ref_text)) };
            let bits = unpack_bits(r.take(bits_len.div_ceil(8))?, bits_len);
            let barcode = Barcode::from_bits(&bits, encoder, num_angles, image_side, window)
                .map_err(|e| IndexError::CorruptIndexFile(format!("entry {id:?}: {e}")))?;
            entries.push(IndexEntry { id, barcode, code, image_ref });
        }
        let lsh_part = if flags & 1 == 1 {
            let num_tables = r.u32()? as usize;
            let key_size = r.u32()? as usize;
            let seed = r.u64()?;
            let cfg = lsh::LshConfig { num_tables, key_size, seed };
            lsh::validate_config(&cfg, bits_len)?;
            let mut positions_per_table = Vec::with_capacity(num_tables);
            for t in 0..num_tables {
                let mut positions = Vec::with_capacity(key_size);
                for _ in 0..key_size {
                    let p = r.u32()?;
                    if p as usize >= bits_len {
                        return Err(IndexError::CorruptIndexFile(format!(
                            "table {t} samples position {p}, barcode has {bits_len} bits"
                        )));
                    }
                    positions.push(p);
                }
                positions_per_table.push(positions);
            }
            Some((cfg, positions_per_table))
        } else {
            None
        };
        if r.pos != bytes.len() {
            return Err(IndexError::CorruptIndexFile(format!(
                "{} trailing bytes after expected end",
                bytes.len() - r.pos
            )));
        }
        let by_id = validate_entries(&entries)?;
        let lsh = lsh_part.map(|(cfg, positions)| lsh::assemble(&entries, cfg, positions));
        Ok(Index { entries, by_id, lsh })
    }
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn pack_bits(bc: &Barcode) -> Vec<u8> {
    let mut out = vec![0u8; bc.len().div_ceil(8)];
    for i in 0..bc.len() {
        if bc.bit(i) {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack_bits(bytes: &[u8], len: usize) -> Vec<bool> {
    (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect()
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        if self.pos + n > self.bytes.len() {
            return Err(IndexError::CorruptIndexFile(format!(
                "file truncated at byte {} ({} more needed)",
                self.pos, n
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, IndexError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]))
    }

    fn string(&mut self) -> Result<String, IndexError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| IndexError::CorruptIndexFile("string field is not UTF-8".into()))
    }
}
