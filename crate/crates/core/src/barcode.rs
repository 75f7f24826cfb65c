//! Binary barcode encoders over Radon projections, plus Hamming distance and a
//! text interchange format.
//!
//! Two encoders produce fixed-length bit strings from a ProjectionSet:
//!
//! * Threshold: each projection is binarized against the median of its strictly
//!   positive values (ties at the median read as 1; an all-nonpositive
//!   projection gives an all-zero row).
//! * MinMax: each projection is smoothed with a centered moving average, its
//!   alternating minima/maxima are located, and the bins between consecutive
//!   extrema are colored by transit direction, 0 rising (Min to Max) and 1
//!   falling (Max to Min). Bins at and after the final extremum continue the
//!   transit into it; a constant projection (single extremum) is all zeros.
//!
//! Both encoders depend only on value order within each projection, never on
//! scale, so uniformly rescaling an image leaves its barcode unchanged.
//!
//! Barcodes carry the parameters that shaped them (encoder, angle count, image
//! side, smoothing window); Hamming distance is defined only between barcodes
//! whose parameters all match.

use std::fmt;
use std::str::FromStr;

use crate::radon::{bins_per_angle, ProjectionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    Threshold,
    MinMax,
}

impl EncoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncoderKind::Threshold => "threshold",
            EncoderKind::MinMax => "minmax",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = BarcodeError;

    fn from_str(s: &str) -> Result<Self, BarcodeError> {
        match s {
            "threshold" => Ok(EncoderKind::Threshold),
            "minmax" => Ok(EncoderKind::MinMax),
            other => Err(BarcodeError::MalformedBarcodeText(format!(
                "unknown encoder name {other:?}"
            ))),
        }
    }
}

#[derive(Debug)]
pub enum BarcodeError {
    InvalidWindow { window: usize, len: usize },
    IncomparableBarcodes(String),
    MalformedBarcodeText(String),
    InvalidBarcode(String),
}

impl fmt::Display for BarcodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarcodeError::InvalidWindow { window, len } => {
                write!(f, "smoothing window {window} invalid for projection length {len}; the window must be odd, >= 1 and <= the length")
            }
            BarcodeError::IncomparableBarcodes(s) => write!(f, "incomparable barcodes: {s}"),
            BarcodeError::MalformedBarcodeText(s) => write!(f, "malformed barcode text: {s}"),
            BarcodeError::InvalidBarcode(s) => write!(f, "invalid barcode: {s}"),
        }
    }
}

impl std::error::Error for BarcodeError {}

/// Fixed-length bit string tagged with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Barcode {
    words: Vec<u64>,
    len: usize,
    encoder: EncoderKind,
    num_angles: usize,
    image_side: usize,
    smoothing_window: usize,
}

impl Barcode {
    fn blank(
        len: usize,
        encoder: EncoderKind,
        num_angles: usize,
        image_side: usize,
        smoothing_window: usize,
    ) -> Self {
        Barcode {
            words: vec![0u64; len.div_ceil(64)],
            len,
            encoder,
            num_angles,
            image_side,
            smoothing_window,
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    /// Builds a barcode from explicit bits, enforcing the same shape rules the
    /// encoders guarantee: bit count equals num_angles * bins_per_angle(side),
    /// threshold barcodes have window 0, minmax windows are odd and fit in a
    /// projection.
    pub fn from_bits(
        bits: &[bool],
        encoder: EncoderKind,
        num_angles: usize,
        image_side: usize,
        smoothing_window: usize,
    ) -> Result<Self, BarcodeError> {
        if num_angles == 0 || image_side == 0 {
            return Err(BarcodeError::InvalidBarcode(format!(
                "num_angles {num_angles} and image_side {image_side} must be >= 1"
            )));
        }
        let bins = bins_per_angle(image_side);
        if bits.len() != num_angles * bins {
            return Err(BarcodeError::InvalidBarcode(format!(
                "{} bits, expected {} ({} angles x {} bins for side {})",
                bits.len(),
                num_angles * bins,
                num_angles,
                bins,
                image_side
            )));
        }
        match encoder {
            EncoderKind::Threshold => {
                if smoothing_window != 0 {
                    return Err(BarcodeError::InvalidBarcode(
                        "threshold barcodes carry window 0".into(),
                    ));
                }
            }
            EncoderKind::MinMax => {
                if smoothing_window == 0 || smoothing_window % 2 == 0 || smoothing_window > bins {
                    return Err(BarcodeError::InvalidBarcode(format!(
                        "minmax window {smoothing_window} must be odd and within 1..={bins}"
                    )));
                }
            }
        }
        let mut bc = Barcode::blank(bits.len(), encoder, num_angles, image_side, smoothing_window);
        for (i, b) in bits.iter().enumerate() {
            if *b {
                bc.set(i);
            }
        }
        Ok(bc)
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for barcode of length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn encoder(&self) -> EncoderKind {
        self.encoder
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn image_side(&self) -> usize {
        self.image_side
    }

    pub fn smoothing_window(&self) -> usize {
        self.smoothing_window
    }

    /// True when the two barcodes came from the same encoder configuration and
    /// their Hamming distance is therefore meaningful.
    pub fn compatible_with(&self, other: &Barcode) -> bool {
        self.encoder == other.encoder
            && self.num_angles == other.num_angles
            && self.image_side == other.image_side
            && self.smoothing_window == other.smoothing_window
    }

}

/// Number of differing bits between two compatible barcodes.
pub fn hamming(a: &Barcode, b: &Barcode) -> Result<usize, BarcodeError> {
    if !a.compatible_with(b) {
        return Err(BarcodeError::IncomparableBarcodes(format!(
            "{}/{} angles={}/{} side={}/{} window={}/{}",
            a.encoder,
            b.encoder,
            a.num_angles,
            b.num_angles,
            a.image_side,
            b.image_side,
            a.smoothing_window,
            b.smoothing_window
        )));
    }
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

/// Threshold encoder: per projection, the threshold is the median of strictly
/// positive values and bit i is set when p[i] >= threshold.
pub fn encode_threshold(ps: &ProjectionSet) -> Barcode {
    let mut bc = Barcode::blank(
        ps.num_angles() * ps.bins_per_angle(),
        EncoderKind::Threshold,
        ps.num_angles(),
        ps.image_side(),
        0,
    );
    let mut offset = 0;
    for row in ps.rows() {
        let mut positive: Vec<f64> = row.iter().copied().filter(|v| *v > 0.0).collect();
        if !positive.is_empty() {
            positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = positive.len();
            let threshold = if n % 2 == 1 {
                positive[n / 2]
            } else {
                (positive[n / 2 - 1] + positive[n / 2]) / 2.0
            };
            for (i, v) in row.iter().enumerate() {
                if *v >= threshold {
                    bc.set(offset + i);
                }
            }
        }
        offset += row.len();
    }
    bc
}

/// Centered moving average; windows truncate at the edges (the first and last
/// samples average over roughly half a window).
pub fn smooth(p: &[f64], window: usize) -> Result<Vec<f64>, BarcodeError> {
    if window == 0 || window % 2 == 0 || window > p.len() {
        return Err(BarcodeError::InvalidWindow { window, len: p.len() });
    }
    let h = window / 2;
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = (i + h).min(n - 1);
        let mut sum = 0.0;
        for v in &p[lo..=hi] {
            sum += v;
        }
        out.push(sum / (hi - lo + 1) as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

/// Alternating extrema of one vector, in index order.
///
/// Invariants: indices strictly increase, kinds strictly alternate, and the
/// list is never empty (a constant vector yields the single entry (0, Min)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremaList(Vec<(usize, ExtremumKind)>);

impl ExtremaList {
    pub fn as_slice(&self) -> &[(usize, ExtremumKind)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Locates alternating extrema. Plateaus collapse to their first index; the
/// first sample takes the kind opposite the initial transit and the last
/// sample the kind the final transit lands on (rise ends in a Max, fall in a
/// Min). Panics on an empty slice.
pub fn find_extrema(values: &[f64]) -> ExtremaList {
    assert!(!values.is_empty(), "find_extrema on empty input");
    let mut out = Vec::new();
    // prev_dir: last strict transit (+1 rise, -1 fall); plateau_start: first
    // index of the run of equal values currently underway.
    let mut prev_dir = 0i8;
    let mut plateau_start = 0usize;
    for i in 1..values.len() {
        let d = if values[i] > values[i - 1] {
            1i8
        } else if values[i] < values[i - 1] {
            -1i8
        } else {
            continue;
        };
        if prev_dir == 0 {
            out.push((0, if d > 0 { ExtremumKind::Min } else { ExtremumKind::Max }));
        } else if d != prev_dir {
            out.push((
                plateau_start,
                if prev_dir > 0 { ExtremumKind::Max } else { ExtremumKind::Min },
            ));
        }
        prev_dir = d;
        plateau_start = i;
    }
    match prev_dir {
        0 => out.push((0, ExtremumKind::Min)),
        d => out.push((
            plateau_start,
            if d > 0 { ExtremumKind::Max } else { ExtremumKind::Min },
        )),
    }
    ExtremaList(out)
}

/// MinMax encoder: smooth, find extrema, color inter-extremum spans by transit
/// direction (0 rising, 1 falling), and extend the last transit's color
/// through the end of the row (1 when the row falls into a final Min,
/// 0 when it rises into a final Max). Constant projections give
/// all-zero rows.
pub fn encode_minmax(ps: &ProjectionSet, window: usize) -> Result<Barcode, BarcodeError> {
    let bins = ps.bins_per_angle();
    if window == 0 || window % 2 == 0 || window > bins {
        return Err(BarcodeError::InvalidWindow { window, len: bins });
    }
    let mut bc = Barcode::blank(
        ps.num_angles() * bins,
        EncoderKind::MinMax,
        ps.num_angles(),
        ps.image_side(),
        window,
    );
    let mut offset = 0;
    for row in ps.rows() {
        let smoothed = smooth(row, window)?;
        let extrema = find_extrema(&smoothed);
        let ext = extrema.as_slice();
        if ext.len() > 1 {
            for pair in ext.windows(2) {
                if pair[0].1 == ExtremumKind::Max {
                    for t in pair[0].0..pair[1].0 {
                        bc.set(offset + t);
                    }
                }
            }
            let (last_idx, last_kind) = ext[ext.len() - 1];
            if last_kind == ExtremumKind::Min {
                for t in last_idx..bins {
                    bc.set(offset + t);
                }
            }
        }
        offset += bins;
    }
    Ok(bc)
}

// Text format: a header line `RBC1;<encoder>;<num_angles>;<image_side>;<window>`
// followed by one line of '0'/'1' per angle.

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "RBC1;{};{};{};{}",
            self.encoder, self.num_angles, self.image_side, self.smoothing_window
        )?;
        let bins = self.len / self.num_angles;
        for a in 0..self.num_angles {
            for i in 0..bins {
                f.write_str(if self.bit(a * bins + i) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Barcode {
    type Err = BarcodeError;

    fn from_str(s: &str) -> Result<Self, BarcodeError> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| BarcodeError::MalformedBarcodeText("empty input".into()))?;
        let fields: Vec<&str> = header.split(';').collect();
        if fields.len() != 5 || fields[0] != "RBC1" {
            return Err(BarcodeError::MalformedBarcodeText(format!(
                "bad header {header:?}, expected RBC1;<encoder>;<angles>;<side>;<window>"
            )));
        }
        let encoder: EncoderKind = fields[1].parse()?;
        let parse_num = |name: &str, v: &str| {
            v.parse::<usize>().map_err(|_| {
                BarcodeError::MalformedBarcodeText(format!("{name} field {v:?} is not a number"))
            })
        };
        let num_angles = parse_num("num_angles", fields[2])?;
        let image_side = parse_num("image_side", fields[3])?;
        let window = parse_num("window", fields[4])?;
        if num_angles == 0 || image_side == 0 {
            return Err(BarcodeError::MalformedBarcodeText(
                "num_angles and image_side must be >= 1".into(),
            ));
        }
        let bins = bins_per_angle(image_side);
        let mut bits = Vec::with_capacity(num_angles * bins);
        for a in 0..num_angles {
            let line = lines.next().ok_or_else(|| {
                BarcodeError::MalformedBarcodeText(format!(
                    "expected {num_angles} bit rows, found {a}"
                ))
            })?;
            if line.len() != bins {
                return Err(BarcodeError::MalformedBarcodeText(format!(
                    "row {a} has {} characters, expected {bins}",
                    line.len()
                )));
            }
            for ch in line.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    other => {
                        return Err(BarcodeError::MalformedBarcodeText(format!(
                            "row {a} contains {other:?}, only 0/1 allowed"
                        )))
                    }
                }
            }
        }
        if let Some(extra) = lines.next() {
            if !extra.trim().is_empty() {
                return Err(BarcodeError::MalformedBarcodeText(format!(
                    "trailing content after bit rows: {extra:?}"
                )));
            }
        }
        Barcode::from_bits(&bits, encoder, num_angles, image_side, window).map_err(|e| match e {
            BarcodeError::InvalidBarcode(msg) => BarcodeError::MalformedBarcodeText(msg),
            other => other,
        })
    }
}
