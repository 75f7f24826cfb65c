//! Discrete parallel-beam Radon projections of square grayscale images.
//!
//! Projection angles are theta_k = k * 180 / num_angles degrees. Pixel centers
//! sit on a grid symmetric about the image center (coordinate x = col - (n-1)/2,
//! likewise y), and each pixel's full intensity splats onto the two nearest unit
//! rho bins with linear weights, so every projection conserves total image mass.
//!
//! The rho axis has 2 * ceil(n / sqrt(2)) + 1 unit bins, enough to cover the
//! farthest pixel center at any angle with a one-bin margin on each side.
//!
//! The symmetric grid makes projections of a 180-degree-rotated image exactly
//! the reversed projections of the original at every size. For odd n it also
//! aligns pixel columns with bin centers, so the theta=0 projection equals the
//! column sums exactly; for even n the grid sits between bins and theta=0 mass
//! splits 50/50 across the two adjacent bins.

use std::fmt;

use crate::imaging::GrayImage;

/// Per-angle projection vectors of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    image_side: usize,
    num_angles: usize,
    bins_per_angle: usize,
    angles_deg: Vec<f64>,
    // row-major, num_angles rows of bins_per_angle values
    values: Vec<f64>,
}

#[derive(Debug)]
pub enum RadonError {
    NonSquareImage { width: usize, height: usize },
    InvalidAngleCount,
    IndexOutOfRange { index: usize, len: usize },
    InvalidProjectionData(String),
}

impl fmt::Display for RadonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadonError::NonSquareImage { width, height } => {
                write!(f, "projection requires a square image, got {width}x{height}")
            }
            RadonError::InvalidAngleCount => write!(f, "num_angles must be >= 1"),
            RadonError::IndexOutOfRange { index, len } => {
                write!(f, "angle index {index} out of range for {len} angles")
            }
            RadonError::InvalidProjectionData(s) => write!(f, "invalid projection data: {s}"),
        }
    }
}

impl std::error::Error for RadonError {}

/// Smallest m with 2*m^2 >= side^2, i.e. ceil(side / sqrt(2)).
///
/// Computed via the integer inequality so float rounding can never change the
/// bin count.
pub fn half_span(side: usize) -> usize {
    let mut m = (side as f64 / std::f64::consts::SQRT_2).ceil() as usize;
    while m > 0 && 2 * (m - 1) * (m - 1) >= side * side {
        m -= 1;
    }
    while 2 * m * m < side * side {
        m += 1;
    }
    m
}

/// Number of rho bins per projection: 2 * half_span(side) + 1.
pub fn bins_per_angle(side: usize) -> usize {
    2 * half_span(side) + 1
}

fn direction(theta_deg: f64) -> (f64, f64) {
    // Exact axis directions; to_radians(90).cos() is ~6e-17, not 0, and that
    // residue would smear axis-aligned splats across two bins.
    if theta_deg == 0.0 {
        (0.0, 1.0)
    } else if theta_deg == 90.0 {
        (1.0, 0.0)
    } else {
        let t = theta_deg.to_radians();
        (t.sin(), t.cos())
    }
}

/// Projects a square image at num_angles evenly spaced angles in [0, 180).
pub fn project(img: &GrayImage, num_angles: usize) -> Result<ProjectionSet, RadonError> {
    if !img.is_square() {
        return Err(RadonError::NonSquareImage { width: img.width(), height: img.height() });
    }
    if num_angles == 0 {
        return Err(RadonError::InvalidAngleCount);
    }
    let side = img.width();
    let m = half_span(side);
    let bins = 2 * m + 1;
    let center = (side as f64 - 1.0) / 2.0;
    let shift = m as f64;
    let mut angles_deg = Vec::with_capacity(num_angles);
    let mut values = vec![0.0f64; num_angles * bins];
    let pixels = img.pixels();
    for k in 0..num_angles {
        let theta = k as f64 * 180.0 / num_angles as f64;
        angles_deg.push(theta);
        let (sin_t, cos_t) = direction(theta);
        let row = &mut values[k * bins..(k + 1) * bins];
        for py in 0..side {
            let y = py as f64 - center;
            let ys = y * sin_t;
            for px in 0..side {
                let v = pixels[py * side + px];
                let x = px as f64 - center;
                // |rho| <= sqrt(2)*(side-1)/2 < m, so t stays inside (0, 2m)
                // and the two target bins always exist.
                let t = x * cos_t + ys + shift;
                let i0 = t.floor();
                let w = t - i0;
                let i0 = i0 as usize;
                row[i0] += v * (1.0 - w);
                if w > 0.0 {
                    row[i0 + 1] += v * w;
                }
            }
        }
    }
    Ok(ProjectionSet { image_side: side, num_angles, bins_per_angle: bins, angles_deg, values })
}

impl ProjectionSet {
    /// Assembles a projection set from raw per-angle values, validating shape
    /// and non-negativity. Mainly useful for tests and synthetic inputs.
    pub fn from_values(
        image_side: usize,
        num_angles: usize,
        values: Vec<f64>,
    ) -> Result<Self, RadonError> {
        if num_angles == 0 {
            return Err(RadonError::InvalidAngleCount);
        }
        if image_side == 0 {
            return Err(RadonError::InvalidProjectionData("image_side must be >= 1".into()));
        }
        let bins = bins_per_angle(image_side);
        if values.len() != num_angles * bins {
            return Err(RadonError::InvalidProjectionData(format!(
                "{} values, expected {} ({} angles x {} bins)",
                values.len(),
                num_angles * bins,
                num_angles,
                bins
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(RadonError::InvalidProjectionData(format!(
                "projection value {v} is negative or not finite"
            )));
        }
        let angles_deg = (0..num_angles).map(|k| k as f64 * 180.0 / num_angles as f64).collect();
        Ok(ProjectionSet { image_side, num_angles, bins_per_angle: bins, angles_deg, values })
    }

    pub fn image_side(&self) -> usize {
        self.image_side
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn bins_per_angle(&self) -> usize {
        self.bins_per_angle
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    /// Projection vector for angle index k.
    pub fn projection_at(&self, k: usize) -> Result<&[f64], RadonError> {
        if k >= self.num_angles {
            return Err(RadonError::IndexOutOfRange { index: k, len: self.num_angles });
        }
        Ok(&self.values[k * self.bins_per_angle..(k + 1) * self.bins_per_angle])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.bins_per_angle)
    }
}
