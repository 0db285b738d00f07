//! Grayscale image containers, ROI extraction, histograms and first-order
//! statistics.
//!
//! Intensities are kept as `f64` regardless of the source bit depth so that
//! filtered and distorted images can carry non-integer values. Quantization
//! only happens when writing integer files or inside extractors that need
//! discrete gray levels.

use crate::error::{Error, Result};

/// A row-major 2-D grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    depth: u8,
    data: Vec<f64>,
}

impl Raster {
    /// Builds a raster from row-major data. `depth` is the nominal bit depth
    /// of the source (8 or 16); it only matters when the raster is written
    /// back to an integer format.
    pub fn new(width: usize, height: usize, depth: u8, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster must be non-empty, got {width}x{height}"
            )));
        }
        if depth != 8 && depth != 16 {
            return Err(Error::InvalidParameter(format!(
                "bit depth must be 8 or 16, got {depth}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite intensity at index {i}"
            )));
        }
        Ok(Raster {
            width,
            height,
            depth,
            data,
        })
    }

    /// Builds a 16-bit raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "raster must be non-empty");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v.is_finite(), "non-finite intensity at ({x}, {y})");
                data.push(v);
            }
        }
        Raster {
            width,
            height,
            depth: 16,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn depth(&self) -> u8 {
        self.depth
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn with_depth(mut self, depth: u8) -> Result<Self> {
        if depth != 8 && depth != 16 {
            return Err(Error::InvalidParameter(format!(
                "bit depth must be 8 or 16, got {depth}"
            )));
        }
        self.depth = depth;
        Ok(self)
    }

    /// Same raster with `f` applied to every intensity.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let data: Vec<f64> = self.data.iter().map(|&v| f(v)).collect();
        assert!(data.iter().all(|v| v.is_finite()), "map produced non-finite intensity");
        Raster { data, ..*self }
    }

    /// Elementwise combination of two equally sized rasters.
    pub fn zip_with(&self, other: &Raster, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Raster { data, ..*self })
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Raster {
            width: self.height,
            height: self.width,
            depth: self.depth,
            data,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub(crate) fn check_same_shape(&self, other: &Raster) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }

    /// Copies out an axis-aligned rectangle.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        check_extent("x", x0, w, self.width)?;
        check_extent("y", y0, h, self.height)?;
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + x0..row + x0 + w]);
        }
        Ok(Raster {
            width: w,
            height: h,
            depth: self.depth,
            data,
        })
    }
}

fn check_extent(axis: &'static str, origin: usize, side: usize, extent: usize) -> Result<()> {
    if origin.checked_add(side).is_none_or(|end| end > extent) {
        return Err(Error::RoiOutOfBounds {
            axis,
            origin,
            side,
            extent,
        });
    }
    Ok(())
}

/// What an ROI was drawn over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoiKind {
    Tumour,
    Background,
}

/// A square region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoiSpec {
    pub origin_x: usize,
    pub origin_y: usize,
    pub side: usize,
    pub kind: RoiKind,
}

impl RoiSpec {
    pub const DEFAULT_SIDE: usize = 32;
    pub const MIN_SIDE: usize = 8;

    pub fn new(origin_x: usize, origin_y: usize, side: usize, kind: RoiKind) -> Result<Self> {
        if side < Self::MIN_SIDE {
            return Err(Error::InvalidParameter(format!(
                "ROI side must be at least {}, got {side}",
                Self::MIN_SIDE
            )));
        }
        Ok(RoiSpec {
            origin_x,
            origin_y,
            side,
            kind,
        })
    }

    pub fn tumour(origin_x: usize, origin_y: usize, side: usize) -> Result<Self> {
        Self::new(origin_x, origin_y, side, RoiKind::Tumour)
    }

    pub fn background(origin_x: usize, origin_y: usize, side: usize) -> Result<Self> {
        Self::new(origin_x, origin_y, side, RoiKind::Background)
    }
}

/// Copies the ROI out of `img`.
pub fn extract_roi(img: &Raster, roi: &RoiSpec) -> Result<Raster> {
    img.crop(roi.origin_x, roi.origin_y, roi.side, roi.side)
}

/// Equal-width intensity histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` monotone edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Counts divided by the total, summing to one.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Tallies `values` on an explicit grid of monotone edges. Bins are
    /// closed below; the final edge is inclusive. Values outside the grid
    /// are clamped into the outermost bins.
    pub fn from_edges(values: &[f64], bin_edges: Vec<f64>) -> Result<Self> {
        if bin_edges.len() < 2 {
            return Err(Error::InvalidParameter("need at least one bin".into()));
        }
        if bin_edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("bin edges must increase".into()));
        }
        let bins = bin_edges.len() - 1;
        let mut counts = vec![0u64; bins];
        for &v in values {
            // upper_bound on the interior edges gives the lower-closed rule
            let idx = bin_edges[1..bins].partition_point(|&e| e <= v);
            counts[idx] += 1;
        }
        Ok(Histogram {
            bin_edges,
            counts,
            total: values.len() as u64,
        })
    }
}

/// Histogram of `img` over `[min, max]` split into `bins` equal-width bins.
pub fn histogram(img: &Raster, bins: usize) -> Result<Histogram> {
    histogram_of(img.data(), bins)
}

pub(crate) fn histogram_of(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "histogram needs at least 2 bins, got {bins}"
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter("histogram of empty sample".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    // A constant sample still gets a well-formed grid; everything lands in bin 0.
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    if hi > lo {
        edges[bins] = hi;
    }
    Histogram::from_edges(values, edges)
}

/// Population moments of an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Standardized fourth moment (3 for a Gaussian).
    pub kurtosis: f64,
    /// Set when the variance is zero; skewness and kurtosis are then 0.
    pub degenerate: bool,
}

pub fn moments(img: &Raster) -> Result<Moments> {
    moments_of(img.data())
}

pub fn moments_of(values: &[f64]) -> Result<Moments> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "moments need at least 2 samples, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Ok(Moments {
            mean,
            variance: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
            degenerate: true,
        });
    }
    Ok(Moments {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(w: usize, h: usize) -> Raster {
        Raster::from_fn(w, h, |x, y| ((x + y) % 2) as f64 * 255.0)
    }

    #[test]
    fn extract_top_left_block() {
        let img = Raster::from_fn(512, 512, |x, y| (x * 3 + y * 7) as f64);
        let roi = RoiSpec::tumour(0, 0, 32).unwrap();
        let sub = extract_roi(&img, &roi).unwrap();
        assert_eq!((sub.width(), sub.height()), (32, 32));
        for y in 0..32 {
            for x in 0..32 {
                assert_eq!(sub.get(x, y), img.get(x, y));
            }
        }
    }

    #[test]
    fn extract_out_of_bounds_names_coordinate() {
        let img = Raster::filled(512, 512, 0.0);
        let roi = RoiSpec::tumour(490, 490, 32).unwrap();
        let err = extract_roi(&img, &roi).unwrap_err();
        match err {
            Error::RoiOutOfBounds { axis, origin, .. } => {
                assert_eq!(axis, "x");
                assert_eq!(origin, 490);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err_string(&img, 10, 490).contains("490"));
    }

    fn err_string(img: &Raster, x: usize, y: usize) -> String {
        extract_roi(img, &RoiSpec::tumour(x, y, 32).unwrap())
            .unwrap_err()
            .to_string()
    }

    #[test]
    fn checkerboard_roi_preserved() {
        let img = checkerboard(64, 48);
        for (ox, oy) in [(0, 0), (3, 5), (32, 16), (10, 7)] {
            let sub = extract_roi(&img, &RoiSpec::tumour(ox, oy, 16).unwrap()).unwrap();
            for y in 0..16 {
                for x in 0..16 {
                    assert_eq!(sub.get(x, y), img.get(ox + x, oy + y));
                }
            }
        }
    }

    #[test]
    fn roi_side_minimum() {
        assert!(RoiSpec::tumour(0, 0, 7).is_err());
        assert!(RoiSpec::tumour(0, 0, 8).is_ok());
    }

    #[test]
    fn histogram_constant_single_bin() {
        let img = Raster::filled(10, 10, 42.0);
        let h = histogram(&img, 16).unwrap();
        assert_eq!(h.counts[0], 100);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.total, 100);
    }

    #[test]
    fn histogram_two_pixels_two_bins() {
        let img = Raster::new(2, 1, 8, vec![0.0, 255.0]).unwrap();
        let h = histogram(&img, 2).unwrap();
        assert_eq!(h.counts, vec![1, 1]);
    }

    #[test]
    fn histogram_boundary_goes_to_upper_bin_except_max() {
        // edges 0, 1, 2, 3, 4; 1.0 sits on a boundary and belongs to bin 1
        let img = Raster::new(4, 1, 8, vec![0.0, 1.0, 2.5, 4.0]).unwrap();
        let h = histogram(&img, 4).unwrap();
        assert_eq!(h.counts, vec![1, 1, 1, 1]);
    }

    #[test]
    fn histogram_rejects_single_bin() {
        assert!(histogram(&Raster::filled(2, 2, 1.0), 1).is_err());
    }

    #[test]
    fn histogram_uniform_random_chi_square() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let data: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(0..256) as f64).collect();
        let img = Raster::new(64, 64, 8, data.clone()).unwrap();
        let h = histogram(&img, 256).unwrap();
        let (lo, hi) = img.min_max();
        assert_eq!((lo, hi), (0.0, 255.0));
        // direct tally: the grid spacing is 255/256 so value v lands in
        // bin floor(v * 256 / 255) except the maximum
        let mut tally = vec![0u64; 256];
        for &v in &data {
            let idx = ((v * 256.0 / 255.0).floor() as usize).min(255);
            tally[idx] += 1;
        }
        assert_eq!(h.counts, tally);
        let expected = data.len() as f64 / 256.0;
        let chi2: f64 = h
            .counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square 99th percentile at 255 degrees of freedom
        assert!(chi2 < 310.457, "chi2 = {chi2}");
    }

    #[test]
    fn normalized_histogram_sums_to_one() {
        let img = Raster::from_fn(17, 13, |x, y| ((x * 31 + y * 17) % 97) as f64);
        let h = histogram(&img, 23).unwrap();
        let s: f64 = h.normalized().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(h.counts.iter().sum::<u64>(), h.total);
    }

    #[test]
    fn moments_constant_is_degenerate() {
        let m = moments(&Raster::filled(5, 5, 7.0)).unwrap();
        assert_eq!((m.mean, m.variance, m.skewness, m.kurtosis), (7.0, 0.0, 0.0, 0.0));
        assert!(m.degenerate);
    }

    #[test]
    fn moments_hand_computed() {
        let img = Raster::new(2, 2, 8, vec![0.0, 0.0, 10.0, 10.0]).unwrap();
        let m = moments(&img).unwrap();
        assert_eq!(m.mean, 5.0);
        assert_eq!(m.variance, 25.0);
        assert_eq!(m.skewness, 0.0);
        assert_eq!(m.kurtosis, 1.0);
    }

    #[test]
    fn moments_need_two_pixels() {
        assert!(moments(&Raster::filled(1, 1, 3.0)).is_err());
    }

    #[test]
    fn seeded_gaussian_moments_within_three_standard_errors() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let (mu, var) = (13.6977, 41.1472);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2009);
        let normal = Normal::new(mu, f64::sqrt(var)).unwrap();
        let n = 128 * 128;
        let data: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let m = moments(&Raster::new(128, 128, 16, data).unwrap()).unwrap();
        let se_mean = (var / n as f64).sqrt();
        let se_var = var * (2.0 / n as f64).sqrt();
        assert!((m.mean - mu).abs() < 3.0 * se_mean, "mean {}", m.mean);
        assert!((m.variance - var).abs() < 3.0 * se_var, "var {}", m.variance);
    }

    #[test]
    fn transpose_round_trip() {
        let img = Raster::from_fn(5, 3, |x, y| (x * 10 + y) as f64);
        let t = img.transpose();
        assert_eq!((t.width(), t.height()), (3, 5));
        assert_eq!(t.get(2, 4), img.get(4, 2));
        assert_eq!(t.transpose(), img);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(Raster::new(2, 2, 8, vec![0.0; 3]).is_err());
        assert!(Raster::new(2, 2, 12, vec![0.0; 4]).is_err());
        assert!(Raster::new(1, 1, 8, vec![f64::NAN]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn raster_strategy() -> impl Strategy<Value = Raster> {
            (2usize..12, 2usize..12).prop_flat_map(|(w, h)| {
                proptest::collection::vec(0.0f64..4096.0, w * h)
                    .prop_map(move |d| Raster::new(w, h, 16, d).unwrap())
            })
        }

        proptest! {
            #[test]
            fn histogram_permutation_invariant(img in raster_strategy(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut shuffled = img.data().to_vec();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let other = Raster::new(img.width(), img.height(), 16, shuffled).unwrap();
                prop_assert_eq!(histogram(&img, 10).unwrap(), histogram(&other, 10).unwrap());
            }

            #[test]
            fn moments_transpose_invariant(img in raster_strategy()) {
                let a = moments(&img).unwrap();
                let b = moments(&img.transpose()).unwrap();
                prop_assert!((a.mean - b.mean).abs() <= 1e-9 * a.mean.abs().max(1.0));
                prop_assert!((a.variance - b.variance).abs() <= 1e-9 * a.variance.max(1.0));
                prop_assert!((a.skewness - b.skewness).abs() <= 1e-6);
                prop_assert!((a.kurtosis - b.kurtosis).abs() <= 1e-6);
            }

            #[test]
            fn roi_moments_match_direct(
                img in raster_strategy().prop_filter("big enough", |r| r.width() >= 8 && r.height() >= 8),
                ox in 0usize..4, oy in 0usize..4,
            ) {
                let side = 8usize.min(img.width() - ox.min(img.width() - 8)).min(img.height());
                let ox = ox.min(img.width() - side);
                let oy = oy.min(img.height() - side);
                let roi = RoiSpec::tumour(ox, oy, side).unwrap();
                let sub = extract_roi(&img, &roi).unwrap();
                let mut direct = Vec::new();
                for y in oy..oy + side {
                    for x in ox..ox + side {
                        direct.push(img.get(x, y));
                    }
                }
                prop_assert_eq!(moments(&sub).unwrap(), moments_of(&direct).unwrap());
            }
        }
    }
}
