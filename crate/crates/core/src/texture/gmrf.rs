//! Third-order Gaussian Markov random field parameters by least squares.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::{FeatureVector, Method};

/// Symmetric-pair sums around one interior pixel.
///
/// Pairs, with `x` along the row and `y` down the columns:
/// 1. `(x±1, y)`, 2. `(x, y±1)`, 3. `(x±2, y)`, 4. `(x, y±2)`,
/// 5. `(x−1, y−1)` + `(x+1, y+1)`, 6. `(x−1, y+1)` + `(x+1, y−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmrfNeighborhood {
    pub sums: [f64; 6],
}

/// Neighbour offsets, one half of each symmetric pair.
pub const PAIR_OFFSETS: [(isize, isize); 6] = [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (1, -1)];

impl GmrfNeighborhood {
    /// `None` unless `(x, y)` is at least two pixels from every border.
    pub fn at(img: &Raster, x: usize, y: usize) -> Option<Self> {
        Self::at_with(|xx, yy| img.get(xx, yy), img.width(), img.height(), x, y)
    }

    fn at_with(
        get: impl Fn(usize, usize) -> f64,
        w: usize,
        h: usize,
        x: usize,
        y: usize,
    ) -> Option<Self> {
        if x < 2 || y < 2 || x + 2 >= w || y + 2 >= h {
            return None;
        }
        let mut sums = [0.0; 6];
        for (s, &(dx, dy)) in sums.iter_mut().zip(&PAIR_OFFSETS) {
            let fwd = get((x as isize + dx) as usize, (y as isize + dy) as usize);
            let back = get((x as isize - dx) as usize, (y as isize - dy) as usize);
            *s = fwd + back;
        }
        Some(GmrfNeighborhood { sums })
    }
}

/// `(α₁..α₆, σ²)`.
///
/// The ROI mean is removed first so the zero-mean field model applies to
/// intensity data with an arbitrary baseline. σ² is normalized by
/// `(M−2)(N−2)`.
pub fn gmrf_features(roi: &Raster) -> Result<FeatureVector> {
    let (w, h) = (roi.width(), roi.height());
    if w < 8 || h < 8 {
        return Err(Error::InvalidParameter(format!("GMRF needs an ROI of at least 8x8, got {w}x{h}")));
    }
    let mean = roi.data().iter().sum::<f64>() / roi.len() as f64;
    let centred = |x: usize, y: usize| roi.get(x, y) - mean;

    let mut normal = Matrix6::<f64>::zeros();
    let mut rhs = Vector6::<f64>::zeros();
    let mut hoods = Vec::with_capacity((w - 4) * (h - 4));
    for y in 2..h - 2 {
        for x in 2..w - 2 {
            let s = Vector6::from(GmrfNeighborhood::at_with(centred, w, h, x, y).unwrap().sums);
            let v = centred(x, y);
            normal += s * s.transpose();
            rhs += s * v;
            hoods.push((s, v));
        }
    }

    let scale = normal.amax();
    let (alpha, degenerate) = if scale == 0.0 {
        (Vector6::zeros(), true)
    } else {
        let svd = normal.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        let rank_deficient = svd.singular_values.min() <= eps;
        let alpha = svd
            .solve(&rhs, eps)
            .map_err(|e| Error::InvalidParameter(format!("GMRF solve failed: {e}")))?;
        (alpha, rank_deficient)
    };

    let rss: f64 = hoods.iter().map(|(s, v)| (v - alpha.dot(s)).powi(2)).sum();
    let sigma2 = rss / ((w - 2) * (h - 2)) as f64;

    let mut values: Vec<f64> = alpha.iter().copied().collect();
    values.push(sigma2);
    let names = (1..=6).map(|i| format!("alpha{i}")).chain(["sigma2".to_string()]).collect();
    Ok(FeatureVector::new(Method::Gmrf, names, values, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample, NoiseModel};
    use crate::synth::gmrf_field;

    #[test]
    fn constant_is_degenerate() {
        let fv = gmrf_features(&Raster::filled(16, 16, 42.0)).unwrap();
        assert!(fv.degenerate);
        assert!(fv.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn white_noise_has_no_interactions() {
        let img = sample(&NoiseModel::gaussian(50.0, 16.0).unwrap(), 64, 64, 3);
        let fv = gmrf_features(&img).unwrap();
        for a in &fv.values[..6] {
            assert!(a.abs() <= 0.1, "{:?}", fv.values);
        }
        let rel = (fv.values[6] - 16.0).abs() / 16.0;
        assert!(rel <= 0.15, "sigma2 {}", fv.values[6]);
    }

    #[test]
    fn recovers_generating_coefficient() {
        let field = gmrf_field(256, [0.2, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, 11).unwrap();
        let fv = gmrf_features(&field).unwrap();
        assert!((fv.values[0] - 0.2).abs() <= 0.05, "{:?}", fv.values);
        for a in &fv.values[1..6] {
            assert!(a.abs() <= 0.05, "{:?}", fv.values);
        }
    }

    #[test]
    fn neighbourhood_requires_two_pixel_margin() {
        let img = Raster::from_fn(8, 8, |x, y| (x + 10 * y) as f64);
        assert!(GmrfNeighborhood::at(&img, 1, 4).is_none());
        assert!(GmrfNeighborhood::at(&img, 4, 6).is_none());
        let n = GmrfNeighborhood::at(&img, 3, 4).unwrap();
        // linear ramp: each symmetric pair sums to twice the centre
        assert!(n.sums.iter().all(|&s| s == 2.0 * 43.0));
    }

    #[test]
    fn rejects_small_roi() {
        assert!(gmrf_features(&Raster::filled(7, 8, 0.0)).is_err());
    }
}
