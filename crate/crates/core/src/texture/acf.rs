//! Autocovariance margins and their exponential / parabolic fits.

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::{FeatureVector, Method};

/// Mean-removed autocovariance at shift `(sx, sy)`, averaged over the
/// overlapping `(W − sx)(H − sy)` positions.
pub fn autocovariance(roi: &Raster, sx: usize, sy: usize) -> f64 {
    let (w, h) = (roi.width(), roi.height());
    let mean = roi.data().iter().sum::<f64>() / roi.len() as f64;
    let mut acc = 0.0;
    for y in 0..h - sy {
        for x in 0..w - sx {
            acc += (roi.get(x, y) - mean) * (roi.get(x + sx, y + sy) - mean);
        }
    }
    acc / ((w - sx) * (h - sy)) as f64
}

/// Normalized horizontal and vertical margins for shifts `0..=side/2`.
/// `None` for a zero-variance ROI.
pub fn margins(roi: &Raster) -> Option<(Vec<f64>, Vec<f64>)> {
    let c0 = autocovariance(roi, 0, 0);
    if c0 <= 0.0 {
        return None;
    }
    let horiz = (0..=roi.width() / 2).map(|k| autocovariance(roi, k, 0) / c0).collect();
    let vert = (0..=roi.height() / 2).map(|k| autocovariance(roi, 0, k) / c0).collect();
    Some((horiz, vert))
}

/// `(A, B)` of `A·exp(−B·k)` by a log-linear fit over positive samples;
/// `None` with fewer than three usable points.
pub fn fit_exponential(margin: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = margin
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 0.0)
        .map(|(k, r)| (k as f64, r.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Some(((my - slope * mx).exp(), -slope))
}

/// `(C, D)` of `1 + C·k + D·k²` by linear least squares.
pub fn fit_parabola(margin: &[f64]) -> (f64, f64) {
    let (mut s2, mut s3, mut s4, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &r) in margin.iter().enumerate() {
        let k = k as f64;
        let y = r - 1.0;
        s2 += k * k;
        s3 += k * k * k;
        s4 += k * k * k * k;
        t1 += k * y;
        t2 += k * k * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() < f64::EPSILON * s2 * s4 {
        return (0.0, 0.0);
    }
    ((t1 * s4 - t2 * s3) / det, (s2 * t2 - s3 * t1) / det)
}

/// `(B_h, B_v, C_h, C_v, D_h, D_v, A_h, A_v)`.
pub fn acf_features(roi: &Raster) -> Result<FeatureVector> {
    if roi.width() < 8 || roi.height() < 8 {
        return Err(Error::InvalidParameter("ACF needs an ROI of at least 8x8".into()));
    }
    let names = ["b_h", "b_v", "c_h", "c_v", "d_h", "d_v", "a_h", "a_v"]
        .map(String::from)
        .to_vec();
    let Some((h, v)) = margins(roi) else {
        return Ok(FeatureVector::new(Method::Acf, names, vec![0.0; 8], true));
    };
    let (eh, ev) = (fit_exponential(&h), fit_exponential(&v));
    let degenerate = eh.is_none() || ev.is_none();
    let (ah, bh) = eh.unwrap_or((0.0, 0.0));
    let (av, bv) = ev.unwrap_or((0.0, 0.0));
    let (ch, dh) = fit_parabola(&h);
    let (cv, dv) = fit_parabola(&v);
    Ok(FeatureVector::new(
        Method::Acf,
        names,
        vec![bh, bv, ch, cv, dh, dv, ah, av],
        degenerate,
    ))
}
