//! Gray-level co-occurrence statistics.

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::quant::{GrayQuant, QuantImage};
use super::{angle_names, FeatureVector, Method, STEPS};

/// Unsymmetrized co-occurrence counts for the pixel offset `(dx, dy)`:
/// entry `[a * levels + b]` counts pixels of level `a` whose neighbour at
/// the offset has level `b`.
pub fn cooccurrence(q: &QuantImage, dx: isize, dy: isize) -> Vec<u64> {
    let l = q.levels;
    let mut counts = vec![0u64; l * l];
    for y in 0..q.height {
        for x in 0..q.width {
            if let Some((nx, ny)) = q.step(x, y, dx, dy) {
                counts[q.get(x, y) * l + q.get(nx, ny)] += 1;
            }
        }
    }
    counts
}

/// `(energy, entropy, dissimilarity, correlation, degenerate)` of a count
/// matrix normalized to a joint pdf.
pub fn matrix_features(counts: &[u64], levels: usize) -> (f64, f64, f64, f64, bool) {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return (0.0, 0.0, 0.0, 0.0, true);
    }
    let total = total as f64;
    let (mut energy, mut entropy, mut dissim, mut mu_x, mut mu_y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for a in 0..levels {
        for b in 0..levels {
            let c = counts[a * levels + b];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total;
            energy += p * p;
            entropy -= p * p.log2();
            dissim += (a as f64 - b as f64).abs() * p;
            mu_x += a as f64 * p;
            mu_y += b as f64 * p;
        }
    }
    let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
    for a in 0..levels {
        for b in 0..levels {
            let c = counts[a * levels + b];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total;
            let (da, db) = (a as f64 - mu_x, b as f64 - mu_y);
            var_x += da * da * p;
            var_y += db * db * p;
            cov += da * db * p;
        }
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return (energy, entropy, dissim, 0.0, true);
    }
    (energy, entropy, dissim, cov / (var_x.sqrt() * var_y.sqrt()), false)
}

/// Energy, entropy, dissimilarity and correlation at 0, 45, 90 and 135
/// degrees, angle-major.
pub fn cm_features(roi: &Raster, quant: &GrayQuant, delta: usize) -> Result<FeatureVector> {
    if roi.width() < 2 || roi.height() < 2 {
        return Err(Error::InvalidParameter("co-occurrence needs at least 2x2 pixels".into()));
    }
    if delta == 0 || delta >= roi.width().min(roi.height()) {
        return Err(Error::InvalidParameter(format!("displacement {delta} out of range")));
    }
    Ok(cm_features_quantized(&quant.quantize(roi), delta))
}

pub fn cm_features_quantized(q: &QuantImage, delta: usize) -> FeatureVector {
    let mut values = Vec::with_capacity(16);
    let mut degenerate = false;
    for &(dx, dy) in &STEPS {
        let counts = cooccurrence(q, dx * delta as isize, dy * delta as isize);
        let (e, h, d, c, deg) = matrix_features(&counts, q.levels);
        degenerate |= deg;
        values.extend_from_slice(&[e, h, d, c]);
    }
    FeatureVector::new(
        Method::Cm,
        angle_names(&["energy", "entropy", "dissimilarity", "correlation"]),
        values,
        degenerate,
    )
}
