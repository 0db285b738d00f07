//! Gabor filter-bank energies computed in the frequency domain.

use std::f64::consts::{PI, SQRT_2};

use crate::error::Result;
use crate::fft2::{bin_frequency, fft2, C64};
use crate::raster::Raster;

use super::{FeatureVector, Method, ANGLES};

/// Side length the filter bank operates on.
pub const BANK_SIDE: usize = 32;

/// Centre frequencies in cycles per pixel, ascending.
pub const FREQUENCIES: [f64; 3] = [SQRT_2 / 16.0, SQRT_2 / 8.0, SQRT_2 / 4.0];

/// Half-power bandwidth of each channel, in octaves.
const BANDWIDTH_OCTAVES: f64 = 0.5;

/// Spatial Gaussian width giving the channel at `f0` a half-power
/// bandwidth of [`BANDWIDTH_OCTAVES`]:
/// `σ = √(2 ln 2)·(2^B + 1) / (2π f0 (2^B − 1))`.
pub fn spatial_sigma(f0: f64) -> f64 {
    let b = 2f64.powf(BANDWIDTH_OCTAVES);
    (2.0 * 2f64.ln()).sqrt() * (b + 1.0) / (2.0 * PI * f0 * (b - 1.0))
}

/// Frequency response of the analytic (one-sided) Gabor channel at
/// `(u, v)` cycles/pixel. The DC term is forced to zero.
pub fn response(f0: f64, theta_deg: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 && v == 0.0 {
        return 0.0;
    }
    let t = theta_deg.to_radians();
    let ur = u * t.cos() + v * t.sin();
    let vr = -u * t.sin() + v * t.cos();
    let sigma_f = 1.0 / (2.0 * PI * spatial_sigma(f0));
    (-((ur - f0).powi(2) + vr * vr) / (2.0 * sigma_f * sigma_f)).exp()
}

/// Bilinear resample to `side × side` with pixel centres aligned.
pub fn resample(img: &Raster, side: usize) -> Raster {
    if img.width() == side && img.height() == side {
        return img.clone();
    }
    let sx = img.width() as f64 / side as f64;
    let sy = img.height() as f64 / side as f64;
    let sample_axis = |p: f64, n: usize| {
        let p = p.clamp(0.0, (n - 1) as f64);
        let i = (p.floor() as usize).min(n.saturating_sub(2));
        (i, (i + 1).min(n - 1), p - i as f64)
    };
    Raster::from_fn(side, side, |x, y| {
        let (x0, x1, fx) = sample_axis((x as f64 + 0.5) * sx - 0.5, img.width());
        let (y0, y1, fy) = sample_axis((y as f64 + 0.5) * sy - 0.5, img.height());
        let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
        let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Mean squared magnitude of each channel's response, frequency-major.
pub fn gabor_features(roi: &Raster) -> Result<FeatureVector> {
    let img = resample(roi, BANK_SIDE);
    let n = BANK_SIDE;
    let mut spectrum: Vec<C64> = img.data().iter().map(|&v| C64::new(v, 0.0)).collect();
    fft2(&mut spectrum, n, n, false);

    let mut values = Vec::with_capacity(12);
    let mut names = Vec::with_capacity(12);
    let mut buf = vec![C64::new(0.0, 0.0); n * n];
    for (fi, &f0) in FREQUENCIES.iter().enumerate() {
        for &theta in &ANGLES {
            for v in 0..n {
                let fv = bin_frequency(v, n);
                for u in 0..n {
                    let i = v * n + u;
                    buf[i] = spectrum[i] * response(f0, theta as f64, bin_frequency(u, n), fv);
                }
            }
            fft2(&mut buf, n, n, true);
            let scale = 1.0 / (n * n) as f64;
            let energy = buf.iter().map(|c| (c * scale).norm_sqr()).sum::<f64>() * scale;
            values.push(energy);
            names.push(format!("f{}_{theta}", fi + 1));
        }
    }
    Ok(FeatureVector::new(Method::Gf, names, values, false))
}
