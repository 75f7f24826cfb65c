//! Plain-data reference implementations used as oracles in rbc tests.
//!
//! Everything here is written as a direct transcription of the documented rules,
//! favoring obviousness over speed, and none of it touches rbc-core types. Images
//! are row-major `&[f64]` slices, barcodes are `Vec<bool>`.

/// Textbook bilinear resample with half-pixel centers and clamped edges.
pub fn reference_bilinear(
    src: &[f64],
    src_w: usize,
    src_h: usize,
    dst_w: usize,
    dst_h: usize,
) -> Vec<f64> {
    assert_eq!(src.len(), src_w * src_h);
    assert!(src_w > 0 && src_h > 0 && dst_w > 0 && dst_h > 0);
    let mut out = Vec::with_capacity(dst_w * dst_h);
    for r in 0..dst_h {
        let sy = (r as f64 + 0.5) * src_h as f64 / dst_h as f64 - 0.5;
        let y0f = sy.floor();
        let wy = sy - y0f;
        let y0 = clamp_index(y0f, src_h);
        let y1 = clamp_index(y0f + 1.0, src_h);
        for c in 0..dst_w {
            let sx = (c as f64 + 0.5) * src_w as f64 / dst_w as f64 - 0.5;
            let x0f = sx.floor();
            let wx = sx - x0f;
            let x0 = clamp_index(x0f, src_w);
            let x1 = clamp_index(x0f + 1.0, src_w);
            let p00 = src[y0 * src_w + x0];
            let p01 = src[y0 * src_w + x1];
            let p10 = src[y1 * src_w + x0];
            let p11 = src[y1 * src_w + x1];
            let v = (1.0 - wy) * ((1.0 - wx) * p00 + wx * p01)
                + wy * ((1.0 - wx) * p10 + wx * p11);
            out.push(v);
        }
    }
    out
}

fn clamp_index(v: f64, len: usize) -> usize {
    if v < 0.0 {
        0
    } else if v > (len - 1) as f64 {
        len - 1
    } else {
        v as usize
    }
}

/// Pixel-driven parallel-beam projections over a square image.
///
/// Angles are k*180/num_angles degrees. Pixel centers sit on a grid symmetric
/// about the image center; each pixel's mass splits linearly between the two
/// nearest of the 2*ceil(side/sqrt(2))+1 unit rho bins. Exact-axis angles use
/// exact direction vectors.
pub fn reference_projections(pixels: &[f64], side: usize, num_angles: usize) -> Vec<Vec<f64>> {
    assert_eq!(pixels.len(), side * side);
    assert!(num_angles >= 1);
    let m = reference_half_span(side);
    let bins = 2 * m + 1;
    let mut all = Vec::with_capacity(num_angles);
    for k in 0..num_angles {
        let theta_deg = k as f64 * 180.0 / num_angles as f64;
        let (s, c) = if theta_deg == 0.0 {
            (0.0, 1.0)
        } else if theta_deg == 90.0 {
            (1.0, 0.0)
        } else {
            let t = theta_deg.to_radians();
            (t.sin(), t.cos())
        };
        let mut row = vec![0.0f64; bins];
        let center = (side as f64 - 1.0) / 2.0;
        for py in 0..side {
            for px in 0..side {
                let v = pixels[py * side + px];
                let x = px as f64 - center;
                let y = py as f64 - center;
                let rho = x * c + y * s;
                let t = rho + m as f64;
                let i0 = t.floor();
                let w = t - i0;
                let i0 = i0 as isize;
                assert!(i0 >= 0 && (i0 as usize) < bins);
                row[i0 as usize] += v * (1.0 - w);
                if w > 0.0 {
                    row[i0 as usize + 1] += v * w;
                }
            }
        }
        all.push(row);
    }
    all
}

/// Smallest m with 2*m^2 >= side^2, i.e. ceil(side / sqrt(2)) computed exactly.
pub fn reference_half_span(side: usize) -> usize {
    let mut m = 0usize;
    while 2 * m * m < side * side {
        m += 1;
    }
    m
}

/// Algorithm 1, line by line: per-projection median of strictly positive values
/// as threshold, bit set when the value reaches the threshold. A projection with
/// no positive values yields an all-zero row.
pub fn alg1_threshold_bits(projections: &[Vec<f64>]) -> Vec<bool> {
    let mut bits = Vec::new();
    for p in projections {
        let mut pos: Vec<f64> = p.iter().copied().filter(|v| *v > 0.0).collect();
        if pos.is_empty() {
            bits.extend(std::iter::repeat(false).take(p.len()));
            continue;
        }
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = pos.len();
        let t = if n % 2 == 1 {
            pos[n / 2]
        } else {
            (pos[n / 2 - 1] + pos[n / 2]) / 2.0
        };
        for v in p {
            bits.push(*v >= t);
        }
    }
    bits
}

/// Centered moving average with truncated windows at the edges.
pub fn alg2_smooth(p: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1 && window % 2 == 1 && window <= p.len());
    let h = window / 2;
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = if i + h < n { i + h } else { n - 1 };
        let mut sum = 0.0;
        for j in lo..=hi {
            sum += p[j];
        }
        out.push(sum / (hi - lo + 1) as f64);
    }
    out
}

/// Alternating extrema of a vector; +1 marks a Max, -1 a Min.
///
/// Plateaus collapse to their first index. The first sample takes the kind
/// opposite the initial transit, the last sample the kind the final transit
/// lands on. A constant vector has the single extremum (0, Min).
pub fn alg2_find_extrema(p: &[f64]) -> Vec<(usize, i8)> {
    assert!(!p.is_empty());
    // Collapse runs of equal consecutive values, keeping each run's first index.
    let mut idx = vec![0usize];
    for i in 1..p.len() {
        if p[i] != p[*idx.last().unwrap()] {
            idx.push(i);
        }
    }
    if idx.len() == 1 {
        return vec![(0, -1)];
    }
    let q = |j: usize| p[idx[j]];
    let mut out = Vec::new();
    out.push((0usize, if q(1) > q(0) { -1i8 } else { 1 }));
    for j in 1..idx.len() - 1 {
        let rose = q(j) > q(j - 1);
        let falls = q(j + 1) < q(j);
        if rose && falls {
            out.push((idx[j], 1));
        } else if !rose && !falls {
            out.push((idx[j], -1));
        }
    }
    let last = idx.len() - 1;
    out.push((idx[last], if q(last) > q(last - 1) { 1 } else { -1 }));
    out
}

/// Algorithm 2, line by line: smooth each projection, find alternating extrema,
/// color Min->Max spans 0 and Max->Min spans 1, and let the bins at and after
/// the final extremum continue the transit into it. A single-extremum
/// (constant) projection yields an all-zero row.
pub fn alg2_minmax_bits(projections: &[Vec<f64>], window: usize) -> Vec<bool> {
    let mut bits = Vec::new();
    for p in projections {
        let smoothed = alg2_smooth(p, window);
        let ext = alg2_find_extrema(&smoothed);
        let n = p.len();
        let mut row = vec![false; n];
        if ext.len() > 1 {
            for w in ext.windows(2) {
                let (start, kind) = w[0];
                let end = w[1].0;
                let fill = kind == 1;
                for t in start..end {
                    row[t] = fill;
                }
            }
            let (start, kind) = *ext.last().unwrap();
            let fill = kind == -1;
            for t in start..n {
                row[t] = fill;
            }
        }
        bits.extend(row);
    }
    bits
}

/// Mismatch count over aligned bit vectors.
pub fn naive_hamming(a: &[bool], b: &[bool]) -> usize {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Every (id, distance) pair sorted by distance then id.
pub fn exhaustive_ranking(codes: &[(String, Vec<bool>)], query: &[bool]) -> Vec<(String, usize)> {
    let mut ranked: Vec<(String, usize)> = codes
        .iter()
        .map(|(id, bits)| (id.clone(), naive_hamming(bits, query)))
        .collect();
    ranked.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Textbook Pearson correlation; 0.0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    num / (va * vb).sqrt()
}
