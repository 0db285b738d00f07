//! Adaptive local noise reduction, noise residuals and distorted images.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Odd side length of the local window.
    pub window: usize,
    /// Variance of the noise corrupting the image.
    pub noise_variance: f64,
    /// Caps the ratio `noise_variance / local_variance` at 1.
    pub clamp_ratio: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            window: 5,
            noise_variance: 0.0,
            clamp_ratio: true,
        }
    }
}

impl FilterConfig {
    pub fn with_noise_variance(noise_variance: f64) -> Self {
        FilterConfig {
            noise_variance,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "filter window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and >= 0, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }
}

/// Reflect-101 index: `-1 -> 1`, `n -> n - 2`.
#[inline]
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Local mean and population variance over the mirrored window at `(x, y)`,
/// plus the window's value range.
fn local_stats(img: &Raster, x: usize, y: usize, radius: isize) -> (f64, f64, f64, f64) {
    let (w, h) = (img.width(), img.height());
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0.0;
    for dy in -radius..=radius {
        let yy = mirror(y as isize + dy, h);
        for dx in -radius..=radius {
            let v = img.get(mirror(x as isize + dx, w), yy);
            sum += v;
            lo = lo.min(v);
            hi = hi.max(v);
            count += 1.0;
        }
    }
    let mean = sum / count;
    let mut ss = 0.0;
    for dy in -radius..=radius {
        let yy = mirror(y as isize + dy, h);
        for dx in -radius..=radius {
            let d = img.get(mirror(x as isize + dx, w), yy) - mean;
            ss += d * d;
        }
    }
    (mean, ss / count, lo, hi)
}

/// Adaptive local noise reduction filter.
///
/// Each pixel moves towards its local window mean by the fraction
/// `noise_variance / local_variance`: untouched when there is no noise,
/// close to the local mean in flat regions and barely changed across
/// strong edges.
///
/// Output values are snapped onto a dyadic grid fine enough to be
/// invisible (relative 2^-51) but coarse enough that `original - clean`
/// and `clean + residual` are exact for integer-valued inputs.
pub fn adaptive_filter(img: &Raster, cfg: &FilterConfig) -> Result<Raster> {
    cfg.validate()?;
    if img.width() < cfg.window || img.height() < cfg.window {
        return Err(Error::InvalidParameter(format!(
            "image {}x{} smaller than filter window {}",
            img.width(),
            img.height(),
            cfg.window
        )));
    }
    if cfg.noise_variance == 0.0 {
        return Ok(img.clone());
    }
    let radius = (cfg.window / 2) as isize;
    let width = img.width();
    let rows: Vec<Vec<f64>> = (0..img.height())
        .into_par_iter()
        .map(|y| {
            (0..width)
                .map(|x| {
                    let v = img.get(x, y);
                    let (mean, var, lo, hi) = local_stats(img, x, y, radius);
                    let mut ratio = if var > 0.0 { cfg.noise_variance / var } else { 1.0 };
                    if cfg.clamp_ratio {
                        ratio = ratio.min(1.0);
                    }
                    let mut out = v - ratio * (v - mean);
                    if cfg.clamp_ratio {
                        // ratio in [0, 1] interpolates v and mean; guard rounding
                        out = out.clamp(lo, hi);
                    }
                    snap_exact(v, out)
                })
                .collect()
        })
        .collect();
    Raster::new(img.width(), img.height(), img.depth(), rows.concat())
}

/// Rounds `value` to a multiple of `q = 2^(e - 51)` where `2^e` bounds both
/// magnitudes, provided `original` is itself a multiple of `q`. Then
/// `original - snapped` is exactly representable and adding it back to
/// `snapped` reproduces `original` bit for bit.
fn snap_exact(original: f64, value: f64) -> f64 {
    let m = original.abs().max(value.abs());
    if m == 0.0 || !m.is_normal() {
        return value;
    }
    let e = m.log2().floor() as i32;
    let q = 2f64.powi(e - 51);
    if q == 0.0 || !q.is_normal() || (original / q).fract() != 0.0 {
        return value;
    }
    (value / q).round() * q
}

/// Noise estimate `original - clean`.
pub fn residual(original: &Raster, clean: &Raster) -> Result<Raster> {
    original.zip_with(clean, |o, c| o - c)
}

/// Distorted image `original + eta`; values are left unclamped.
pub fn distort(original: &Raster, eta: &Raster) -> Result<Raster> {
    original.zip_with(eta, |o, e| o + e)
}
