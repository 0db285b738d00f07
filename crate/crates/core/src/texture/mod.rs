//! The seven texture extractors. Each maps an ROI to a fixed-length,
//! named feature vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::Raster;

pub mod acf;
pub mod cm;
pub mod fd;
pub mod gabor;
pub mod gmrf;
pub mod normalize;
pub mod quant;
pub mod rlm;
pub mod wp;

pub use normalize::normalize_features;
pub use quant::{GrayQuant, QuantImage};
pub use wp::Wavelet;

/// Texture measurement method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gmrf,
    Fd,
    Cm,
    Rlm,
    Acf,
    Gf,
    Wp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Gmrf,
        Method::Fd,
        Method::Cm,
        Method::Rlm,
        Method::Acf,
        Method::Gf,
        Method::Wp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gmrf => "GMRF",
            Method::Fd => "FD",
            Method::Cm => "CM",
            Method::Rlm => "RLM",
            Method::Acf => "ACF",
            Method::Gf => "GF",
            Method::Wp => "WP",
        }
    }

    /// Number of features the method produces.
    pub fn feature_count(self) -> usize {
        match self {
            Method::Gmrf => 7,
            Method::Fd => 5,
            Method::Cm => 16,
            Method::Rlm => 16,
            Method::Acf => 8,
            Method::Gf => 12,
            Method::Wp => 4,
        }
    }

    /// Feature names in output order, without running the extractor.
    pub fn feature_names(self) -> Vec<String> {
        let owned = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        match self {
            Method::Gmrf => (1..=6).map(|i| format!("alpha{i}")).chain(["sigma2".to_string()]).collect(),
            Method::Fd => owned(&["mean", "variance", "skewness", "kurtosis", "lacunarity"]),
            Method::Cm => angle_names(&["energy", "entropy", "dissimilarity", "correlation"]),
            Method::Rlm => angle_names(&["sre", "lre", "gln", "rln"]),
            Method::Acf => owned(&["b_h", "b_v", "c_h", "c_v", "d_h", "d_v", "a_h", "a_v"]),
            Method::Gf => (1..=3)
                .flat_map(|f| ANGLES.iter().map(move |a| format!("f{f}_{a}")))
                .collect(),
            Method::Wp => ["ll", "lh", "hl", "hh"].map(|s| format!("max_child_{s}")).to_vec(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == up)
            .ok_or_else(|| Error::Parse(format!("unknown texture method {s:?}")))
    }
}

/// Named features of one ROI under one method.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub method: Method,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Set when the ROI hit a documented degenerate case (flat region,
    /// singular system, zero-variance marginal).
    pub degenerate: bool,
}

impl FeatureVector {
    pub(crate) fn new(method: Method, names: Vec<String>, values: Vec<f64>, degenerate: bool) -> Self {
        debug_assert_eq!(names.len(), method.feature_count());
        debug_assert_eq!(names, method.feature_names());
        debug_assert_eq!(values.len(), method.feature_count());
        debug_assert!(values.iter().all(|v| v.is_finite()), "{method}: {values:?}");
        FeatureVector {
            method,
            names,
            values,
            degenerate,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// `case_id,version,method,feature_name,value` rows.
    pub fn csv_rows(&self, case_id: &str, version: &str) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.values)
            .map(|(n, v)| format!("{case_id},{version},{},{n},{v}", self.method))
            .collect()
    }
}

pub const FEATURE_CSV_HEADER: &str = "case_id,version,method,feature_name,value";

/// Angles used by the directional statistics, in degrees.
pub const ANGLES: [u32; 4] = [0, 45, 90, 135];

/// Unit pixel step for each of [`ANGLES`] as `(dx, dy)` with `y` pointing
/// down the rows.
pub(crate) const STEPS: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

/// Tunable extractor settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureConfig {
    pub cm_levels: usize,
    pub cm_delta: usize,
    pub rlm_levels: usize,
    pub fd_window: usize,
    pub fd_max_scale: usize,
    pub wavelet: Wavelet,
}

impl Default for TextureConfig {
    fn default() -> Self {
        TextureConfig {
            cm_levels: 64,
            cm_delta: 1,
            rlm_levels: 16,
            fd_window: fd::DEFAULT_WINDOW,
            fd_max_scale: fd::DEFAULT_MAX_SCALE,
            wavelet: Wavelet::Db4,
        }
    }
}

/// Runs one extractor with the given settings.
pub fn extract(method: Method, roi: &Raster, cfg: &TextureConfig) -> Result<FeatureVector> {
    match method {
        Method::Gmrf => gmrf::gmrf_features(roi),
        Method::Fd => fd::fd_features_with(roi, cfg.fd_window, cfg.fd_max_scale),
        Method::Cm => cm::cm_features(roi, &GrayQuant::new(cfg.cm_levels)?, cfg.cm_delta),
        Method::Rlm => rlm::rlm_features(roi, &GrayQuant::new(cfg.rlm_levels)?),
        Method::Acf => acf::acf_features(roi),
        Method::Gf => gabor::gabor_features(roi),
        Method::Wp => wp::wp_features(roi, cfg.wavelet),
    }
}

/// Runs all seven extractors in [`Method::ALL`] order.
pub fn extract_all(roi: &Raster, cfg: &TextureConfig) -> Result<Vec<FeatureVector>> {
    Method::ALL.iter().map(|&m| extract(m, roi, cfg)).collect()
}

pub(crate) fn angle_names(prefixes: &[&str]) -> Vec<String> {
    ANGLES
        .iter()
        .flat_map(|a| prefixes.iter().map(move |p| format!("{p}_{a}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample, NoiseModel};

    #[test]
    fn every_extractor_has_its_fixed_length() {
        let roi = sample(&NoiseModel::gaussian(100.0, 25.0).unwrap(), 32, 32, 8);
        for fv in extract_all(&roi, &TextureConfig::default()).unwrap() {
            assert_eq!(fv.len(), fv.method.feature_count(), "{}", fv.method);
            assert_eq!(fv.names.len(), fv.len());
            assert!(fv.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn extractors_are_deterministic() {
        let roi = sample(&NoiseModel::gaussian(100.0, 25.0).unwrap(), 32, 32, 9);
        let a = extract_all(&roi, &TextureConfig::default()).unwrap();
        let b = extract_all(&roi.clone(), &TextureConfig::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let xb: Vec<u64> = x.values.iter().map(|v| v.to_bits()).collect();
            let yb: Vec<u64> = y.values.iter().map(|v| v.to_bits()).collect();
            assert_eq!(xb, yb, "{}", x.method);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(m.as_str().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert!("LBP".parse::<Method>().is_err());
    }

    #[test]
    fn csv_rows_shape() {
        let roi = Raster::from_fn(32, 32, |x, y| ((x * y) % 7) as f64);
        let fv = extract(Method::Wp, &roi, &TextureConfig::default()).unwrap();
        let rows = fv.csv_rows("c1", "original");
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("c1,original,WP,"));
    }
}
