//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::noise::DEFAULT_BINS;
use crate::recon::{ReconFilter, DEFAULT_ANGLES};
use crate::separability::DEFAULT_RIDGE;
use crate::texture::{TextureConfig, Wavelet};

/// Settings for an assessment run. Every field has a default; see
/// [`RunConfig::KEYS`] for the serialized names.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Case manifest CSV.
    pub manifest: PathBuf,
    /// Directory receiving the report CSVs.
    pub output_dir: PathBuf,
    /// Seed for synthetic corpus generation.
    pub seed: u64,
    /// Worker count; 0 uses all available cores. `TEXNOISE_THREADS` caps it.
    pub threads: usize,
    /// Histogram bins for noise identification.
    pub noise_bins: usize,
    pub filter_window: usize,
    pub filter_clamp_ratio: bool,
    pub recon_angles: usize,
    /// `None` skips reconstruction.
    pub recon_filter: Option<ReconFilter>,
    pub detector_spacing: f64,
    pub texture: TextureConfig,
    pub ridge: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = FilterConfig::default();
        RunConfig {
            manifest: PathBuf::from("manifest.csv"),
            output_dir: PathBuf::from("results"),
            seed: 0,
            threads: 0,
            noise_bins: DEFAULT_BINS,
            filter_window: f.window,
            filter_clamp_ratio: f.clamp_ratio,
            recon_angles: DEFAULT_ANGLES,
            recon_filter: Some(ReconFilter::default()),
            detector_spacing: 1.0,
            texture: TextureConfig::default(),
            ridge: DEFAULT_RIDGE,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("invalid value {v:?} for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("invalid boolean {v:?} for {key}"))),
    }
}

/// Parses a reconstruction filter name, with `none` meaning no reconstruction.
pub fn parse_recon_filter(v: &str) -> Result<Option<ReconFilter>> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        v.parse().map(Some)
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 17] = [
        "manifest",
        "output_dir",
        "seed",
        "threads",
        "noise_bins",
        "filter_window",
        "filter_clamp_ratio",
        "recon_angles",
        "recon_filter",
        "detector_spacing",
        "cm_levels",
        "cm_delta",
        "rlm_levels",
        "fd_window",
        "fd_max_scale",
        "wavelet",
        "ridge",
    ];

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "manifest" => self.manifest = PathBuf::from(v),
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            "noise_bins" => self.noise_bins = parse_num(key, v)?,
            "filter_window" => self.filter_window = parse_num(key, v)?,
            "filter_clamp_ratio" => self.filter_clamp_ratio = parse_bool(key, v)?,
            "recon_angles" => self.recon_angles = parse_num(key, v)?,
            "recon_filter" => self.recon_filter = parse_recon_filter(v)?,
            "detector_spacing" => self.detector_spacing = parse_num(key, v)?,
            "cm_levels" => self.texture.cm_levels = parse_num(key, v)?,
            "cm_delta" => self.texture.cm_delta = parse_num(key, v)?,
            "rlm_levels" => self.texture.rlm_levels = parse_num(key, v)?,
            "fd_window" => self.texture.fd_window = parse_num(key, v)?,
            "fd_max_scale" => self.texture.fd_max_scale = parse_num(key, v)?,
            "wavelet" => self.texture.wavelet = v.parse::<Wavelet>()?,
            "ridge" => self.ridge = parse_num(key, v)?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses config text: one `key = value` per line, `#` starts a comment,
    /// unspecified keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.manifest.is_relative() {
            cfg.manifest = base.join(&cfg.manifest);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Serializes every key; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let t = &self.texture;
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        put("manifest", self.manifest.display().to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("seed", self.seed.to_string());
        put("threads", self.threads.to_string());
        put("noise_bins", self.noise_bins.to_string());
        put("filter_window", self.filter_window.to_string());
        put("filter_clamp_ratio", self.filter_clamp_ratio.to_string());
        put("recon_angles", self.recon_angles.to_string());
        put(
            "recon_filter",
            self.recon_filter.map_or("none", |f| f.as_str()).to_string(),
        );
        put("detector_spacing", self.detector_spacing.to_string());
        put("cm_levels", t.cm_levels.to_string());
        put("cm_delta", t.cm_delta.to_string());
        put("rlm_levels", t.rlm_levels.to_string());
        put("fd_window", t.fd_window.to_string());
        put("fd_max_scale", t.fd_max_scale.to_string());
        put("wavelet", t.wavelet.to_string());
        put("ridge", self.ridge.to_string());
        s
    }

    pub fn filter_config(&self, noise_variance: f64) -> FilterConfig {
        FilterConfig {
            window: self.filter_window,
            noise_variance,
            clamp_ratio: self.filter_clamp_ratio,
        }
    }

    /// Worker count after applying the `TEXNOISE_THREADS` cap.
    pub fn worker_count(&self) -> usize {
        let auto = std::thread::available_parallelism().map_or(1, |n| n.get());
        let wanted = if self.threads == 0 { auto } else { self.threads };
        let cap = std::env::var("TEXNOISE_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        cap.map_or(wanted, |c| wanted.min(c)).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn every_key_is_serialized() {
        let text = RunConfig::default().to_text();
        for k in RunConfig::KEYS {
            assert!(text.lines().any(|l| l.starts_with(&format!("{k} ="))), "{k}");
        }
    }

    #[test]
    fn custom_values_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("recon_filter", "none").unwrap();
        cfg.set("wavelet", "haar").unwrap();
        cfg.set("ridge", "0.000123").unwrap();
        cfg.set("seed", "42").unwrap();
        cfg.set("filter_clamp_ratio", "false").unwrap();
        cfg.set("output_dir", "/tmp/x y").unwrap();
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.recon_filter, None);
    }

    #[test]
    fn comments_and_errors() {
        let cfg = RunConfig::parse("# run\nseed = 7 # trailing\n\nrecon_angles=90\n").unwrap();
        assert_eq!((cfg.seed, cfg.recon_angles), (7, 90));
        assert!(RunConfig::parse("seeds = 1").is_err());
        assert!(RunConfig::parse("seed 1").is_err());
        assert!(RunConfig::parse("seed = x").is_err());
    }
}
