//! Grayscale image loading and size normalization.
//!
//! Intensities are f64 in [0, 1]. PGM (P2/P5) is parsed here so integer samples
//! scale exactly by 1/maxval; PNG goes through the `image` crate and color
//! inputs take the unweighted channel mean.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Row-major grayscale raster with every intensity in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image, rejecting dimension/length mismatches and out-of-range
    /// or non-finite intensities.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidImageData(format!(
                "zero dimension: {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(ImagingError::InvalidImageData(format!(
                "pixel buffer holds {} values, expected {}",
                pixels.len(),
                width * height
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ImagingError::InvalidImageData(format!(
                "intensity {v} outside [0, 1]"
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Intensity at (row, col). Panics out of bounds, like slice indexing.
    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.height && col < self.width, "pixel ({row},{col}) out of bounds");
        self.pixels[row * self.width + col]
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }
}

#[derive(Debug)]
pub enum ImagingError {
    FileNotFound(PathBuf),
    UnsupportedFormat(String),
    CorruptImage(String),
    InvalidDimensions { rows: usize, cols: usize },
    InvalidImageData(String),
    Io(io::Error),
}

impl fmt::Display for ImagingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImagingError::FileNotFound(p) => write!(f, "file not found: {}", p.display()),
            ImagingError::UnsupportedFormat(s) => write!(f, "unsupported image format: {s}"),
            ImagingError::CorruptImage(s) => write!(f, "corrupt image: {s}"),
            ImagingError::InvalidDimensions { rows, cols } => {
                write!(f, "invalid target dimensions {rows}x{cols}, both sides must be >= 2")
            }
            ImagingError::InvalidImageData(s) => write!(f, "invalid image data: {s}"),
            ImagingError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for ImagingError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ImagingError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for ImagingError {
    fn from(e: io::Error) -> Self {
        ImagingError::Io(e)
    }
}

/// Loads a PNG or PGM file as grayscale.
///
/// Integer samples scale by 1/maxval (1/255 or 1/65535 for PNG); color PNGs
/// average the R, G, B channels. The format is sniffed from the file's magic
/// bytes, not its extension.
pub fn load_grayscale(path: &Path) -> Result<GrayImage, ImagingError> {
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            ImagingError::FileNotFound(path.to_path_buf())
        } else {
            ImagingError::Io(e)
        }
    })?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        let head: Vec<String> = bytes.iter().take(4).map(|b| format!("{b:02x}")).collect();
        Err(ImagingError::UnsupportedFormat(format!(
            "unrecognized magic bytes [{}] in {}",
            head.join(" "),
            path.display()
        )))
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    use image::DynamicImage;

    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| ImagingError::CorruptImage(format!("png decode failed: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut pixels = Vec::with_capacity(w * h);
    match img {
        DynamicImage::ImageLuma8(b) => {
            pixels.extend(b.pixels().map(|p| p.0[0] as f64 / 255.0));
        }
        DynamicImage::ImageLumaA8(b) => {
            pixels.extend(b.pixels().map(|p| p.0[0] as f64 / 255.0));
        }
        DynamicImage::ImageRgb8(b) => {
            pixels.extend(
                b.pixels()
                    .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 255.0)),
            );
        }
        DynamicImage::ImageRgba8(b) => {
            pixels.extend(
                b.pixels()
                    .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 255.0)),
            );
        }
        DynamicImage::ImageLuma16(b) => {
            pixels.extend(b.pixels().map(|p| p.0[0] as f64 / 65535.0));
        }
        DynamicImage::ImageLumaA16(b) => {
            pixels.extend(b.pixels().map(|p| p.0[0] as f64 / 65535.0));
        }
        DynamicImage::ImageRgb16(b) => {
            pixels.extend(
                b.pixels()
                    .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 65535.0)),
            );
        }
        DynamicImage::ImageRgba16(b) => {
            pixels.extend(
                b.pixels()
                    .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 65535.0)),
            );
        }
        other => {
            let rgba = other.to_rgba16();
            pixels.extend(
                rgba.pixels()
                    .map(|p| (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 65535.0)),
            );
        }
    }
    GrayImage::new(w, h, pixels)
}

/// PGM header/body parser for P2 (ASCII) and P5 (binary).
///
/// Comments (# to end of line) are allowed anywhere in the header. P5 samples
/// are one byte for maxval < 256, two big-endian bytes otherwise. Values above
/// maxval are an error rather than clamped.
fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    let mut cur = Cursor { bytes, pos: 2 };
    let binary = bytes.starts_with(b"P5");
    let width = cur.next_uint("width")?;
    let height = cur.next_uint("height")?;
    let maxval = cur.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImagingError::CorruptImage(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(ImagingError::CorruptImage(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let mut raw = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(ImagingError::CorruptImage(
                    "missing whitespace between header and raster".into(),
                ))
            }
        }
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let data = &cur.bytes[cur.pos..];
        if data.len() < need {
            return Err(ImagingError::CorruptImage(format!(
                "raster truncated: {} bytes present, {} required",
                data.len(),
                need
            )));
        }
        if wide {
            for ch in data[..need].chunks_exact(2) {
                raw.push(u16::from_be_bytes([ch[0], ch[1]]) as usize);
            }
        } else {
            raw.extend(data[..need].iter().map(|b| *b as usize));
        }
    } else {
        for _ in 0..count {
            raw.push(cur.next_uint("sample")?);
        }
    }
    if let Some(v) = raw.iter().find(|v| **v > maxval) {
        return Err(ImagingError::CorruptImage(format!("sample {v} exceeds maxval {maxval}")));
    }
    let pixels = raw.iter().map(|v| *v as f64 / maxval as f64).collect();
    GrayImage::new(width, height, pixels)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn next_uint(&mut self, what: &str) -> Result<usize, ImagingError> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if *b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => {
                    return Err(ImagingError::CorruptImage(format!(
                        "header ended before {what}"
                    )))
                }
            }
        }
        let start = self.pos;
        while let Some(b) = self.bytes.get(self.pos) {
            if b.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(ImagingError::CorruptImage(format!(
                "expected digits for {what}, found byte 0x{:02x}",
                self.bytes[start]
            )));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<usize>()
            .map_err(|_| ImagingError::CorruptImage(format!("{what} value {text} out of range")))
    }
}

/// Bilinear resample to rows x cols with half-pixel centers and clamped edges.
///
/// Resampling to the image's own size returns a bit-identical copy. Every
/// output value is a convex combination of input values, so the output range
/// never leaves the input range; each 1-D interpolation clamps to its endpoint
/// interval to make that hold exactly in floating point.
pub fn normalize(img: &GrayImage, rows: usize, cols: usize) -> Result<GrayImage, ImagingError> {
    if rows < 2 || cols < 2 {
        return Err(ImagingError::InvalidDimensions { rows, cols });
    }
    if rows == img.height && cols == img.width {
        return Ok(img.clone());
    }
    let (sw, sh) = (img.width, img.height);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let sy = (r as f64 + 0.5) * sh as f64 / rows as f64 - 0.5;
        let y0 = sy.floor();
        let wy = sy - y0;
        let ya = clamp_to(y0, sh);
        let yb = clamp_to(y0 + 1.0, sh);
        for c in 0..cols {
            let sx = (c as f64 + 0.5) * sw as f64 / cols as f64 - 0.5;
            let x0 = sx.floor();
            let wx = sx - x0;
            let xa = clamp_to(x0, sw);
            let xb = clamp_to(x0 + 1.0, sw);
            let top = lerp(img.pixels[ya * sw + xa], img.pixels[ya * sw + xb], wx);
            let bot = lerp(img.pixels[yb * sw + xa], img.pixels[yb * sw + xb], wx);
            out.push(lerp(top, bot, wy));
        }
    }
    GrayImage::new(cols, rows, out)
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    let v = a + w * (b - a);
    v.clamp(a.min(b), a.max(b))
}

fn clamp_to(v: f64, len: usize) -> usize {
    if v < 0.0 {
        0
    } else if v > (len - 1) as f64 {
        len - 1
    } else {
        v as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn pgm_p5_basic() {
        let f = write_temp(b"P5\n2 2\n255\n\x00\xff\xff\x00");
        let img = load_grayscale(f.path()).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(img.pixels(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn pgm_scaling_is_exact() {
        let f = write_temp(b"P5\n1 1\n255\n\x80");
        let img = load_grayscale(f.path()).unwrap();
        assert_eq!(img.pixel(0, 0), 128.0 / 255.0);
    }

    #[test]
    fn pgm_p2_with_comments() {
        let f = write_temp(b"P2\n# a comment\n2 1\n# another\n100\n50 100\n");
        let img = load_grayscale(f.path()).unwrap();
        assert_eq!(img.pixels(), &[0.5, 1.0]);
    }

    #[test]
    fn pgm_16bit_big_endian() {
        // 0x0100 = 256 of 65535
        let f = write_temp(b"P5\n1 1\n65535\n\x01\x00");
        let img = load_grayscale(f.path()).unwrap();
        assert_eq!(img.pixel(0, 0), 256.0 / 65535.0);
    }

    #[test]
    fn pgm_sample_above_maxval_rejected() {
        let f = write_temp(b"P2\n1 1\n10\n11\n");
        match load_grayscale(f.path()) {
            Err(ImagingError::CorruptImage(_)) => {}
            other => panic!("expected CorruptImage, got {other:?}"),
        }
    }

    #[test]
    fn pgm_truncated_raster_rejected() {
        let f = write_temp(b"P5\n2 2\n255\n\x00\xff");
        assert!(matches!(load_grayscale(f.path()), Err(ImagingError::CorruptImage(_))));
    }

    #[test]
    fn missing_file_is_file_not_found() {
        let e = load_grayscale(Path::new("/nonexistent/img.pgm")).unwrap_err();
        assert!(matches!(e, ImagingError::FileNotFound(_)));
    }

    #[test]
    fn garbage_magic_is_unsupported() {
        let f = write_temp(b"GIF89a....");
        assert!(matches!(load_grayscale(f.path()), Err(ImagingError::UnsupportedFormat(_))));
    }

    #[test]
    fn png_black_is_zero() {
        let mut buf = Vec::new();
        let img = image::GrayImage::from_pixel(4, 4, image::Luma([0u8]));
        image::DynamicImage::ImageLuma8(img)
            .write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        let f = write_temp(&buf);
        let loaded = load_grayscale(f.path()).unwrap();
        assert!(loaded.pixels().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn png_rgb_channel_mean() {
        let mut buf = Vec::new();
        let img = image::RgbImage::from_pixel(2, 2, image::Rgb([30u8, 60, 90]));
        image::DynamicImage::ImageRgb8(img)
            .write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        let f = write_temp(&buf);
        let loaded = load_grayscale(f.path()).unwrap();
        let want = (30.0 + 60.0 + 90.0) / (3.0 * 255.0);
        for v in loaded.pixels() {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_same_size_is_identity() {
        let img = GrayImage::new(3, 3, vec![0.1; 9]).unwrap();
        let out = normalize(&img, 3, 3).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn normalize_uniform_stays_uniform() {
        let img = GrayImage::new(64, 64, vec![0.5; 64 * 64]).unwrap();
        let out = normalize(&img, 32, 32).unwrap();
        assert!(out.pixels().iter().all(|v| *v == 0.5));
    }

    #[test]
    fn normalize_2x2_to_4x4_hand_values() {
        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let out = normalize(&img, 4, 4).unwrap();
        let want = [
            0.0, 0.25, 0.75, 1.0, //
            0.25, 0.375, 0.625, 0.75, //
            0.75, 0.625, 0.375, 0.25, //
            1.0, 0.75, 0.25, 0.0,
        ];
        for (g, w) in out.pixels().iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-12, "got {g}, want {w}");
        }
    }

    #[test]
    fn normalize_matches_reference() {
        let pixels: Vec<f64> = (0..20 * 12).map(|i| ((i * 7) % 13) as f64 / 13.0).collect();
        let img = GrayImage::new(20, 12, pixels.clone()).unwrap();
        let out = normalize(&img, 32, 32).unwrap();
        let want = rbc_testkit::reference_bilinear(&pixels, 20, 12, 32, 32);
        for (g, w) in out.pixels().iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_range_never_grows() {
        let pixels: Vec<f64> = (0..25).map(|i| 0.2 + 0.6 * (i as f64 / 24.0)).collect();
        let img = GrayImage::new(5, 5, pixels).unwrap();
        let out = normalize(&img, 13, 7).unwrap();
        for v in out.pixels() {
            assert!(*v >= 0.2 && *v <= 0.8);
        }
    }

    #[test]
    fn normalize_rejects_tiny_targets() {
        let img = GrayImage::new(4, 4, vec![0.0; 16]).unwrap();
        assert!(matches!(
            normalize(&img, 1, 8),
            Err(ImagingError::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn gray_image_rejects_out_of_range() {
        assert!(GrayImage::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
    }
}
