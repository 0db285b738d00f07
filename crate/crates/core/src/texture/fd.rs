//! Local fractal dimension from the scaling of mean absolute differences.

use crate::error::{Error, Result};
use crate::raster::{moments_of, Raster};

use super::{FeatureVector, Method};

pub const DEFAULT_WINDOW: usize = 9;
pub const DEFAULT_MAX_SCALE: usize = 4;

/// Half of the pixel-pair offsets whose rounded length lies in
/// `1..=max_scale`, each tagged with that length.
fn pair_offsets(max_scale: usize) -> Vec<(isize, isize, usize)> {
    let r = max_scale as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in 0..=r {
            if dx == 0 && dy <= 0 {
                continue;
            }
            let d = ((dx * dx + dy * dy) as f64).sqrt().round() as usize;
            if (1..=max_scale).contains(&d) {
                out.push((dx, dy, d));
            }
        }
    }
    out
}

/// Least-squares slope of `ln E(ΔI)` against `ln Δr`, ignoring empty or
/// zero scales. `None` when fewer than two scales remain.
pub fn hurst_slope(mean_abs_diff: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = mean_abs_diff
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(d, e)| ((d as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Fractal dimension of one window, clamped to `[2, 3]`.
fn window_fd(
    roi: &Raster,
    x0: usize,
    y0: usize,
    window: usize,
    offsets: &[(isize, isize, usize)],
    max_scale: usize,
) -> f64 {
    let mut sum = vec![0.0; max_scale + 1];
    let mut count = vec![0u32; max_scale + 1];
    let w = window as isize;
    for &(dx, dy, d) in offsets {
        for y in 0..w {
            let y2 = y + dy;
            if !(0..w).contains(&y2) {
                continue;
            }
            for x in 0..w - dx {
                let a = roi.get(x0 + x as usize, y0 + y as usize);
                let b = roi.get(x0 + (x + dx) as usize, y0 + y2 as usize);
                sum[d] += (a - b).abs();
                count[d] += 1;
            }
        }
    }
    let e: Vec<(usize, f64)> = (1..=max_scale)
        .filter(|&d| count[d] > 0)
        .map(|d| (d, sum[d] / count[d] as f64))
        .collect();
    match hurst_slope(&e) {
        Some(h) => (3.0 - h).clamp(2.0, 3.0),
        None => 2.0,
    }
}

/// Local fractal-dimension image: one value per window position that fits
/// entirely inside the ROI (no padding), so the image is
/// `(W − window + 1) × (H − window + 1)`.
pub fn fd_image(roi: &Raster, window: usize, max_scale: usize) -> Result<Raster> {
    if window < 2 || max_scale == 0 || max_scale >= window {
        return Err(Error::InvalidParameter(format!(
            "FD window {window} must exceed the largest scale {max_scale}"
        )));
    }
    if roi.width() < window || roi.height() < window {
        return Err(Error::InvalidParameter("ROI smaller than the FD window".into()));
    }
    let offsets = pair_offsets(max_scale);
    let (ow, oh) = (roi.width() - window + 1, roi.height() - window + 1);
    let mut data = Vec::with_capacity(ow * oh);
    for y0 in 0..oh {
        for x0 in 0..ow {
            data.push(window_fd(roi, x0, y0, window, &offsets, max_scale));
        }
    }
    Raster::new(ow, oh, 16, data)
}

pub fn fd_features(roi: &Raster) -> Result<FeatureVector> {
    fd_features_with(roi, DEFAULT_WINDOW, DEFAULT_MAX_SCALE)
}

/// Mean, variance, skewness, kurtosis and lacunarity (variance / mean²)
/// of the local fractal-dimension image.
pub fn fd_features_with(roi: &Raster, window: usize, max_scale: usize) -> Result<FeatureVector> {
    if roi.width() < 16 || roi.height() < 16 {
        return Err(Error::InvalidParameter("FD needs an ROI of at least 16x16".into()));
    }
    let img = fd_image(roi, window, max_scale)?;
    let m = moments_of(img.data())?;
    let lacunarity = m.variance / (m.mean * m.mean);
    Ok(FeatureVector::new(
        Method::Fd,
        ["mean", "variance", "skewness", "kurtosis", "lacunarity"]
            .map(String::from)
            .to_vec(),
        vec![m.mean, m.variance, m.skewness, m.kurtosis, lacunarity],
        m.degenerate,
    ))
}
