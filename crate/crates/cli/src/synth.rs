//! Synthetic labeled corpus generator.
//!
//! Images are 64x64 PGM files, each a constellation of bright blobs over a
//! faint carrier disk of fixed radius. The carrier is the same for every
//! class, so silhouette extent carries no label at all: every labeled
//! property lives in where the blobs sit, which reaches the descriptors as
//! the number, position, and spacing of humps in the ray integrals. The
//! label encodes the discrete choices as a four-axis code `FV-OJ-SR-PX`:
//!
//! * axis 1: family digit (0 symmetric pair, 1 pendant ring, 2 offset
//!   pair), then a variant digit that scales the blob radius
//! * axis 2: orientation bucket (multiples of 60 degrees), then the sign of
//!   an angular jitter within the bucket
//! * axis 3: separation bucket, then the sign of a separation jitter within
//!   the bucket
//! * axis 4: kernel profile (0 round, 1 plateau), then the side the whole
//!   constellation is nudged toward (0 or 1)
//!
//! Amplitude, center, exposure gamma, and illumination tilt never appear in
//! the code: they model acquisition conditions rather than identity, so they
//! are nuisance parameters the descriptors are expected to absorb.
//!
//! The pair families collapse to a single hump at angles along their axis
//! and spread to full separation at angles across it, while the ring keeps
//! its two rim humps at the same spacing from every angle, so the way the
//! hump pattern moves across projection angles identifies the family and
//! the orientation, and the spacing itself identifies the size.
//!
//! Every image gets its own RNG stream keyed by its index, so corpora of
//! different sizes share a prefix and a given (seed, index) pair always
//! renders the same bytes.

use std::fs;
use std::path::Path;

use anyhow::Context;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SIDE: usize = 64;

/// Blob separation per size bucket, in render pixels. The steps stay wider
/// than the separation jitter and survive the encode-time downscale, so
/// neighboring buckets remain distinguishable as hump spacings.
const SIZE_SEP: [f64; 4] = [20.0, 24.0, 28.0, 32.0];

/// Radius of the faint background disk every image shares. It is a nuisance
/// floor, not a label: keeping it fixed means the outline says nothing.
const CARRIER_RADIUS: f64 = 28.0;
const CARRIER_LEVEL: f64 = 0.12;

const BLOB_RADIUS: f64 = 4.8;

/// Relative amplitude of the per-pixel multiplicative noise on lit pixels.
const PIXEL_NOISE: f64 = 0.15;

pub struct SynthImage {
    pub id: String,
    pub file_name: String,
    pub code: String,
    /// Row-major 8-bit samples, SIDE x SIDE.
    pub pixels: Vec<u8>,
}

struct Params {
    family: u32,
    variant: u32,
    obucket: u32,
    jitter_deg: f64,
    sbucket: u32,
    sjitter: f64,
    sep: f64,
    profile: u32,
    phase: u32,
    amp: f64,
    cx: f64,
    cy: f64,
    gamma: f64,
    tilt_dir: f64,
    tilt: f64,
}

impl Params {
    fn draw(rng: &mut ChaCha8Rng) -> Params {
        let family = rng.gen_range(0..3u32);
        let variant = rng.gen_range(0..2u32);
        let obucket = rng.gen_range(0..3u32);
        // Jitters are magnitude-times-sign draws with the magnitude bounded
        // away from zero, so the sign digit in the code is never decided by
        // a hairline difference.
        let jitter_deg =
            rng.gen_range(2.0..8.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sbucket = rng.gen_range(0..4u32);
        let sjitter =
            rng.gen_range(0.25..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sep = SIZE_SEP[sbucket as usize] + sjitter;
        let profile = rng.gen_range(0..2u32);
        let phase = rng.gen_range(0..2u32);
        let amp = rng.gen_range(0.55..1.0);
        let cx = 31.5 + rng.gen_range(-0.75..0.75);
        let cy = 31.5 + rng.gen_range(-0.75..0.75);
        let gamma = rng.gen_range(-0.6..0.6f64).exp();
        let tilt_dir = rng.gen_range(0.0..std::f64::consts::TAU);
        let tilt = rng.gen_range(0.25..0.60);
        Params {
            family,
            variant,
            obucket,
            jitter_deg,
            sbucket,
            sjitter,
            sep,
            profile,
            phase,
            amp,
            cx,
            cy,
            gamma,
            tilt_dir,
            tilt,
        }
    }

    fn code(&self) -> String {
        let jsign = if self.jitter_deg < 0.0 { 0 } else { 1 };
        let ssign = if self.sjitter < 0.0 { 0 } else { 1 };
        format!(
            "{}{}-{}{}-{}{}-{}{}",
            self.family, self.variant, self.obucket, jsign, self.sbucket, ssign,
            self.profile, self.phase
        )
    }

    fn angle_rad(&self) -> f64 {
        (self.obucket as f64 * 60.0 + self.jitter_deg).to_radians()
    }

    /// Intensity at an image-plane point, before amplitude scaling.
    fn shade(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.cx;
        let dy = y - self.cy;

        let (sin_t, cos_t) = self.angle_rad().sin_cos();
        // Constellation frame. The phase digit nudges the whole pattern
        // sideways relative to the carrier disk, which shows up as a signed
        // offset between the hump cluster and the carrier dome.
        let off = 0.06 * self.sep * if self.phase == 1 { 1.0 } else { -1.0 };
        let u = dx * cos_t + dy * sin_t;
        let v = -dx * sin_t + dy * cos_t - off;

        let rb = BLOB_RADIUS * if self.variant == 1 { 1.12 } else { 0.88 };
        let blob = |du: f64, dv: f64, pr: f64| -> f64 {
            let qq = ((du * du + dv * dv) / (pr * pr)).min(1.0);
            // The plateau kernel keeps more mass near its rim, so its humps
            // run flatter and end more abruptly than the round kernel's.
            let s = if self.profile == 1 { qq * qq } else { qq };
            1.0 - s
        };

        let h = 0.5 * self.sep;
        let parts = match self.family {
            0 => blob(u - h, v, rb).max(blob(u + h, v, rb)),
            1 => {
                // A ring shows two rim humps at the same spacing from every
                // angle, unlike the pair families whose spacing sweeps with
                // the angle. The pendant blob on the rim breaks rotational
                // symmetry so the orientation stays readable.
                let d = (u * u + v * v).sqrt();
                let qq = (((d - h) / (0.55 * rb)).powi(2)).min(1.0);
                let s = if self.profile == 1 { qq * qq } else { qq };
                let ring = 1.0 - s;
                ring.max(blob(u - h, v, 0.9 * rb))
            }
            _ => {
                // Same pair as family 0 but the midpoint sits off the
                // carrier center along the axis, so the hump pair rides
                // visibly off the carrier dome's crest.
                let c = 0.18 * self.sep;
                blob(u - c - h, v, rb).max(blob(u - c + h, v, rb))
            }
        };

        // The carrier is additive background, not an envelope: blobs keep
        // their full mass even where they overhang the carrier rim.
        let rr = (dx * dx + dy * dy).sqrt();
        let carrier = ((CARRIER_RADIUS - rr) / 3.0).clamp(0.0, 1.0);
        (CARRIER_LEVEL * carrier + (1.0 - CARRIER_LEVEL) * parts).min(1.0)
    }

    /// 2x2 supersampled 8-bit render. Noise draws happen once per output
    /// pixel in row-major order, lit or not, so the stream position stays a
    /// pure function of (seed, index).
    fn render(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        let mut pixels = Vec::with_capacity(SIDE * SIDE);
        for py in 0..SIDE {
            for px in 0..SIDE {
                let mut acc = 0.0;
                for (ox, oy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    acc += self.shade(px as f64 + ox, py as f64 + oy);
                }
                let noise = rng.gen_range(-1.0..1.0);
                // Acquisition model: exposure gamma, then an illumination
                // plane sloping across the frame, then sensor noise. All of
                // it stays strictly positive on lit pixels.
                let (sin_d, cos_d) = self.tilt_dir.sin_cos();
                let along = ((px as f64 - 31.5) * cos_d + (py as f64 - 31.5) * sin_d) / 45.25;
                let light = 1.0 + self.tilt * along;
                let mut val = (self.amp * (acc / 4.0).powf(self.gamma) * light).clamp(0.0, 1.0);
                if val > 0.0 {
                    val = (val * (1.0 + PIXEL_NOISE * noise)).clamp(0.0, 1.0);
                }
                pixels.push((val * 255.0).round() as u8);
            }
        }
        pixels
    }
}

pub fn generate(seed: u64, index: u64) -> SynthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    let params = Params::draw(&mut rng);
    let id = format!("img-{index:05}");
    SynthImage {
        file_name: format!("{id}.pgm"),
        code: params.code(),
        pixels: params.render(&mut rng),
        id,
    }
}

pub fn pgm_bytes(pixels: &[u8], side: usize) -> Vec<u8> {
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Writes `count` images plus a manifest.csv into `out_dir`, creating it if
/// needed. Returns the generated rows in manifest order.
pub fn write_corpus(out_dir: &Path, count: usize, seed: u64) -> anyhow::Result<Vec<SynthImage>> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut manifest = String::from("id,path,irma_code\n");
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let image = generate(seed, i as u64);
        let path = out_dir.join(&image.file_name);
        fs::write(&path, pgm_bytes(&image.pixels, SIDE))
            .with_context(|| format!("cannot write {}", path.display()))?;
        manifest.push_str(&format!("{},{},{}\n", image.id, image.file_name, image.code));
        images.push(image);
    }
    let manifest_path = out_dir.join("manifest.csv");
    fs::write(&manifest_path, manifest)
        .with_context(|| format!("cannot write {}", manifest_path.display()))?;
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbc_core::IrmaCode;

    #[test]
    fn same_seed_and_index_render_identical_bytes() {
        let a = generate(7, 3);
        let b = generate(7, 3);
        assert_eq!(a.pixels, b.pixels);
        assert_eq!(a.code, b.code);
    }

    #[test]
    fn different_indexes_render_different_bytes() {
        let a = generate(7, 3);
        let b = generate(7, 4);
        assert_ne!(a.pixels, b.pixels);
    }

    #[test]
    fn corpus_prefix_is_stable_across_counts() {
        let a = generate(11, 0);
        let dir = tempfile::tempdir().unwrap();
        let images = write_corpus(dir.path(), 3, 11).unwrap();
        assert_eq!(images[0].pixels, a.pixels);
    }

    #[test]
    fn codes_parse_and_share_axis_lengths() {
        for i in 0..40 {
            let img = generate(5, i);
            let code: IrmaCode = img.code.parse().unwrap();
            assert_eq!(code.axis_lengths(), [2, 2, 2, 2], "code {}", img.code);
        }
    }

    #[test]
    fn images_are_nontrivial() {
        for i in 0..20 {
            let img = generate(9, i);
            let lit = img.pixels.iter().filter(|&&p| p > 0).count();
            assert!(lit > 30, "image {i} nearly empty: {lit} lit pixels");
            assert!(
                lit < SIDE * SIDE,
                "image {i} saturated: every pixel lit"
            );
        }
    }

    #[test]
    fn written_corpus_loads_back_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), 4, 2).unwrap();
        let rows = crate::manifest::read_manifest(&dir.path().join("manifest.csv")).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let img = rbc_core::load_grayscale(&row.path).unwrap();
            assert_eq!(img.width(), SIDE);
            assert_eq!(img.height(), SIDE);
        }
    }
}
