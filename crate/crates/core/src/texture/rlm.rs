//! Gray-level run-length statistics.

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::quant::{GrayQuant, QuantImage};
use super::{angle_names, FeatureVector, Method, STEPS};

/// Run-length matrix for one direction: `counts[g * max_run + (len - 1)]`
/// is the number of maximal runs of level `g` with length `len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthMatrix {
    pub levels: usize,
    pub max_run: usize,
    pub counts: Vec<u64>,
}

impl RunLengthMatrix {
    pub fn total_runs(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(SRE, LRE, GLN, RLN)`.
    pub fn features(&self) -> (f64, f64, f64, f64) {
        let nr = self.total_runs() as f64;
        let (mut sre, mut lre, mut gln, mut rln) = (0.0, 0.0, 0.0, 0.0);
        for g in 0..self.levels {
            let row = &self.counts[g * self.max_run..(g + 1) * self.max_run];
            let mut per_level = 0u64;
            for (i, &c) in row.iter().enumerate() {
                let len = (i + 1) as f64;
                sre += c as f64 / (len * len);
                lre += c as f64 * len * len;
                per_level += c;
            }
            gln += (per_level as f64).powi(2);
        }
        for i in 0..self.max_run {
            let per_len: u64 = (0..self.levels).map(|g| self.counts[g * self.max_run + i]).sum();
            rln += (per_len as f64).powi(2);
        }
        (sre / nr, lre / nr, gln / nr, rln / nr)
    }
}

/// Decomposes every line of pixels along `(dx, dy)` into maximal runs.
pub fn run_lengths(q: &QuantImage, dx: isize, dy: isize) -> RunLengthMatrix {
    let max_run = q.width.max(q.height);
    let mut counts = vec![0u64; q.levels * max_run];
    for y in 0..q.height {
        for x in 0..q.width {
            // a line starts where the previous pixel along the direction is outside
            if q.step(x, y, -dx, -dy).is_some() {
                continue;
            }
            let (mut cx, mut cy) = (x, y);
            let mut level = q.get(cx, cy);
            let mut len = 1;
            while let Some((nx, ny)) = q.step(cx, cy, dx, dy) {
                let g = q.get(nx, ny);
                if g == level {
                    len += 1;
                } else {
                    counts[level * max_run + len - 1] += 1;
                    level = g;
                    len = 1;
                }
                (cx, cy) = (nx, ny);
            }
            counts[level * max_run + len - 1] += 1;
        }
    }
    RunLengthMatrix {
        levels: q.levels,
        max_run,
        counts,
    }
}

/// SRE, LRE, GLN and RLN at 0, 45, 90 and 135 degrees, angle-major.
pub fn rlm_features(roi: &Raster, quant: &GrayQuant) -> Result<FeatureVector> {
    if roi.width() < 2 || roi.height() < 2 {
        return Err(Error::InvalidParameter("run lengths need at least 2x2 pixels".into()));
    }
    Ok(rlm_features_quantized(&quant.quantize(roi)))
}

pub fn rlm_features_quantized(q: &QuantImage) -> FeatureVector {
    let mut values = Vec::with_capacity(16);
    for &(dx, dy) in &STEPS {
        let (sre, lre, gln, rln) = run_lengths(q, dx, dy).features();
        values.extend_from_slice(&[sre, lre, gln, rln]);
    }
    FeatureVector::new(Method::Rlm, angle_names(&["sre", "lre", "gln", "rln"]), values, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn constant_rows() {
        let fv = rlm_features(&Raster::filled(32, 32, 5.0), &GrayQuant::new(16).unwrap()).unwrap();
        assert!(close(fv.get("sre_0").unwrap(), 1.0 / 1024.0));
        assert!(close(fv.get("lre_0").unwrap(), 1024.0));
        assert!(close(fv.get("gln_0").unwrap(), 32.0));
        assert!(close(fv.get("rln_0").unwrap(), 32.0));
    }

    #[test]
    fn checkerboard_has_unit_runs() {
        let img = Raster::from_fn(8, 8, |x, y| ((x + y) % 2) as f64);
        let fv = rlm_features(&img, &GrayQuant::new(16).unwrap()).unwrap();
        assert_eq!(fv.get("sre_0"), Some(1.0));
        assert_eq!(fv.get("lre_0"), Some(1.0));
        assert_eq!(fv.get("sre_90"), Some(1.0));
        // diagonals are monochrome
        assert!(fv.get("lre_45").unwrap() > 1.0);
    }

    #[test]
    fn every_pixel_is_in_exactly_one_run() {
        let img = Raster::from_fn(7, 5, |x, y| ((x * 3 + y * 5) % 4) as f64);
        let q = GrayQuant::new(4).unwrap().quantize(&img);
        for &(dx, dy) in &STEPS {
            let m = run_lengths(&q, dx, dy);
            let pixels: u64 = m
                .counts
                .iter()
                .enumerate()
                .map(|(i, &c)| c * ((i % m.max_run) as u64 + 1))
                .sum();
            assert_eq!(pixels, 35, "direction ({dx},{dy})");
        }
    }
}
