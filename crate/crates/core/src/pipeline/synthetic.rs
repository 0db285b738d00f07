//! Synthetic CT-like corpus: a textured tumour patch inside a body disk on
//! an air background, with additive acquisition noise.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{write_pgm, PgmEncoding};
use crate::noise::{fit_family, sample_values, NoiseFamily};
use crate::raster::{Raster, RoiSpec};
use crate::synth::{fbm_surface, gmrf_field};

use super::manifest::{manifest_csv, CaseManifestEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    Mrf,
    Fbm,
    /// Equal mix of an MRF field and an fBm surface.
    Blend,
}

impl TextureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TextureKind::Mrf => "mrf",
            TextureKind::Fbm => "fbm",
            TextureKind::Blend => "blend",
        }
    }
}

impl fmt::Display for TextureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TextureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrf" => Ok(TextureKind::Mrf),
            "fbm" => Ok(TextureKind::Fbm),
            "blend" => Ok(TextureKind::Blend),
            _ => Err(Error::Parse(format!("unknown texture kind {s:?}"))),
        }
    }
}

/// Noise family assignment across cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseChoice {
    /// Mostly Gaussian with occasional Rayleigh and Erlang cases, in the
    /// proportions 51 : 2 : 3.
    Mixed,
    Fixed(NoiseFamily),
}

impl fmt::Display for NoiseChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseChoice::Mixed => f.write_str("mixed"),
            NoiseChoice::Fixed(fam) => fam.fmt(f),
        }
    }
}

impl FromStr for NoiseChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mixed") {
            Ok(NoiseChoice::Mixed)
        } else {
            s.parse().map(NoiseChoice::Fixed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_cases: usize,
    /// Image side in pixels.
    pub side: usize,
    pub roi_side: usize,
    pub texture_kind: TextureKind,
    /// Range of the shared horizontal/vertical MRF coefficient.
    pub mrf_alpha: (f64, f64),
    /// Range of the fBm Hurst exponent.
    pub hurst: (f64, f64),
    /// Standard deviation of the tumour texture in gray levels.
    pub texture_contrast: f64,
    pub tumour_level: f64,
    pub body_level: f64,
    pub noise: NoiseChoice,
    pub noise_mean: (f64, f64),
    pub noise_variance: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_cases: 56,
            side: 128,
            roi_side: RoiSpec::DEFAULT_SIDE,
            texture_kind: TextureKind::Blend,
            mrf_alpha: (0.05, 0.2),
            hurst: (0.3, 0.7),
            texture_contrast: 12.0,
            tumour_level: 140.0,
            body_level: 90.0,
            noise: NoiseChoice::Mixed,
            noise_mean: (7.2, 25.1),
            noise_variance: (7.5, 86.8),
            seed: 0,
        }
    }
}

/// Noise parameters drawn for one case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseNoise {
    pub family: NoiseFamily,
    pub mean: f64,
    pub variance: f64,
}

/// One generated case before it is written out.
#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub case_id: String,
    pub image: Raster,
    pub mask: Raster,
    pub noise: CaseNoise,
    pub tumour_roi: RoiSpec,
    pub background_roi: RoiSpec,
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Per-case stream derived from the corpus seed (SplitMix64 finalizer).
fn case_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_variance(field: &Raster) -> Raster {
    let n = field.len() as f64;
    let mean = field.data().iter().sum::<f64>() / n;
    let sd = (field.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        field.map(|v| (v - mean) / sd)
    } else {
        field.map(|_| 0.0)
    }
}

impl SyntheticSpec {
    fn patch_side(&self) -> usize {
        self.roi_side + 16
    }

    fn body_radius(&self) -> f64 {
        0.34 * self.side as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_cases == 0 {
            return bad("n_cases must be positive".into());
        }
        if self.roi_side < RoiSpec::MIN_SIDE {
            return bad(format!("roi_side must be at least {}", RoiSpec::MIN_SIDE));
        }
        for (name, (lo, hi)) in [
            ("noise_mean", self.noise_mean),
            ("noise_variance", self.noise_variance),
            ("mrf_alpha", self.mrf_alpha),
            ("hurst", self.hurst),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return bad(format!("{name} range [{lo}, {hi}] is invalid"));
            }
        }
        if self.noise_variance.0 < 0.0 {
            return bad("noise variance must be non-negative".into());
        }
        if !(self.mrf_alpha.0 >= 0.0 && self.mrf_alpha.1 < 0.25) {
            return bad("mrf_alpha must lie in [0, 0.25)".into());
        }
        if !(self.hurst.0 > 0.0 && self.hurst.1 < 1.0) {
            return bad("hurst must lie in (0, 1)".into());
        }
        // the background ROI in the corner must clear the body disk, and
        // the tumour patch must fit inside it
        let r2 = std::f64::consts::SQRT_2;
        let corner_gap = (self.side as f64 / 2.0 - self.roi_side as f64) * r2;
        let patch_reach = self.patch_side() as f64 / 2.0 * r2;
        if corner_gap <= self.body_radius() || patch_reach >= self.body_radius() {
            return bad(format!(
                "image side {} too small for {}-pixel ROIs",
                self.side, self.roi_side
            ));
        }
        Ok(())
    }

    fn texture(&self, rng: &mut ChaCha8Rng) -> Result<Raster> {
        let p = self.patch_side();
        let mrf = |rng: &mut ChaCha8Rng| {
            let a = draw(rng, self.mrf_alpha);
            gmrf_field(p, [a, a, 0.0, 0.0, 0.0, 0.0], 1.0, rng.random())
        };
        let field = match self.texture_kind {
            TextureKind::Mrf => mrf(rng)?,
            TextureKind::Fbm => fbm_surface(p, draw(rng, self.hurst), rng.random())?,
            TextureKind::Blend => {
                let m = unit_variance(&mrf(rng)?);
                let f = fbm_surface(p, draw(rng, self.hurst), rng.random())?;
                m.zip_with(&f, |a, b| a + b)?
            }
        };
        Ok(unit_variance(&field))
    }

    /// Builds case `index` (0-based) in memory.
    pub fn generate_case(&self, index: usize) -> Result<SyntheticCase> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(self.seed, index));
        let family = match self.noise {
            NoiseChoice::Fixed(f) => f,
            NoiseChoice::Mixed => match rng.random_range(0..56) {
                0..51 => NoiseFamily::Gaussian,
                51..53 => NoiseFamily::Rayleigh,
                _ => NoiseFamily::Erlang,
            },
        };
        let noise = CaseNoise {
            family,
            mean: draw(&mut rng, self.noise_mean),
            variance: draw(&mut rng, self.noise_variance),
        };
        let texture = self.texture(&mut rng)?;

        let n = self.side;
        let centre = n as f64 / 2.0;
        let radius = self.body_radius();
        let p = self.patch_side();
        let p0 = (n - p) / 2;
        let in_body = |x: usize, y: usize| {
            (x as f64 + 0.5 - centre).hypot(y as f64 + 0.5 - centre) <= radius
        };
        let clean = Raster::from_fn(n, n, |x, y| {
            if (p0..p0 + p).contains(&x) && (p0..p0 + p).contains(&y) {
                self.tumour_level + self.texture_contrast * texture.get(x - p0, y - p0)
            } else if in_body(x, y) {
                self.body_level
            } else {
                0.0
            }
        });
        let added = if noise.variance > 0.0 {
            let model = fit_family(noise.family, noise.mean, noise.variance)?;
            sample_values(&model, n * n, &mut rng)
        } else {
            vec![noise.mean; n * n]
        };
        let data = clean
            .data()
            .iter()
            .zip(&added)
            .map(|(c, e)| (c + e).round().clamp(0.0, 255.0))
            .collect();
        let image = Raster::new(n, n, 8, data)?;
        let mask = Raster::from_fn(n, n, |x, y| if in_body(x, y) { 255.0 } else { 0.0 }).with_depth(8)?;
        let r0 = (n - self.roi_side) / 2;
        Ok(SyntheticCase {
            case_id: format!("case{:03}", index + 1),
            image,
            mask,
            noise,
            tumour_roi: RoiSpec::tumour(r0, r0, self.roi_side)?,
            background_roi: RoiSpec::background(0, 0, self.roi_side)?,
        })
    }
}

/// Writes every case as binary PGM (`images/`, `masks/`) plus
/// `manifest.csv` under `out_dir`. The manifest stores paths relative to
/// `out_dir`; the returned entries carry them joined onto `out_dir`.
pub fn generate_synthetic(spec: &SyntheticSpec, out_dir: impl AsRef<Path>) -> Result<Vec<CaseManifestEntry>> {
    spec.validate()?;
    let out = out_dir.as_ref();
    for sub in ["images", "masks"] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let entries = (0..spec.n_cases)
        .into_par_iter()
        .map(|i| {
            let case = spec.generate_case(i)?;
            let image_rel = PathBuf::from("images").join(format!("{}.pgm", case.case_id));
            let mask_rel = PathBuf::from("masks").join(format!("{}_mask.pgm", case.case_id));
            write_pgm(out.join(&image_rel), &case.image, PgmEncoding::Binary)?;
            write_pgm(out.join(&mask_rel), &case.mask, PgmEncoding::Binary)?;
            Ok(CaseManifestEntry {
                case_id: case.case_id,
                image_path: image_rel,
                body_mask_path: Some(mask_rel),
                tumour_roi: case.tumour_roi,
                background_roi: case.background_roi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = out.join("manifest.csv");
    std::fs::write(&manifest, manifest_csv(&entries)).map_err(|e| Error::io(&manifest, e))?;
    Ok(entries
        .into_iter()
        .map(|e| CaseManifestEntry {
            image_path: out.join(&e.image_path),
            body_mask_path: e.body_mask_path.map(|p| out.join(p)),
            ..e
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::identify;
    use crate::raster::{extract_roi, moments};

    #[test]
    fn default_spec_is_valid() {
        SyntheticSpec::default().validate().unwrap();
        let bad = SyntheticSpec { side: 48, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn background_roi_is_air_and_tumour_is_textured() {
        let spec = SyntheticSpec::default();
        let case = spec.generate_case(0).unwrap();
        let bg = extract_roi(&case.mask, &case.background_roi).unwrap();
        assert!(bg.data().iter().all(|&v| v == 0.0));
        let tm = extract_roi(&case.mask, &case.tumour_roi).unwrap();
        assert!(tm.data().iter().all(|&v| v == 255.0));
        let t = moments(&extract_roi(&case.image, &case.tumour_roi).unwrap()).unwrap();
        assert!((t.mean - spec.tumour_level - case.noise.mean).abs() < 10.0);
    }

    #[test]
    fn zero_variance_noise_is_flat() {
        let spec = SyntheticSpec {
            noise_variance: (0.0, 0.0),
            ..Default::default()
        };
        let case = spec.generate_case(3).unwrap();
        let m = moments(&extract_roi(&case.image, &case.background_roi).unwrap()).unwrap();
        assert!(m.variance < 1e-12);
    }

    #[test]
    fn gaussian_cases_identify_as_gaussian() {
        let spec = SyntheticSpec {
            noise: NoiseChoice::Fixed(NoiseFamily::Gaussian),
            noise_mean: (15.0, 15.0),
            noise_variance: (30.0, 30.0),
            ..Default::default()
        };
        let hits = (0..100)
            .filter(|&i| {
                let c = spec.generate_case(i).unwrap();
                let bg = extract_roi(&c.image, &c.background_roi).unwrap();
                identify(&bg, 64).unwrap().best.family() == NoiseFamily::Gaussian
            })
            .count();
        assert!(hits >= 90, "{hits}/100");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec::default();
        let a = spec.generate_case(5).unwrap();
        let b = spec.generate_case(5).unwrap();
        assert_eq!(a.image, b.image);
        assert_ne!(a.image, spec.generate_case(6).unwrap().image);
    }
}
